#include "cbayes/inference.hpp"

#include <algorithm>
#include <cmath>

#include "cbayes/special.hpp"

namespace cbayes {

PushforwardResult build_pushforward(const ForwardModel& model, const DensityModel& prior, std::size_t count,
                                    RngStream& rng, const BandwidthRule& rule, std::size_t workers) {
    require(prior.dim() == model.in_dim(), ErrorKind::Input, "prior dimension does not match model input");
    require(count >= 2, ErrorKind::Input, "push-forward construction needs at least 2 samples");
    const std::uint64_t seed = rng.seed();
    Matrix params = prior.sample(count, rng);
    Matrix qois = evaluate_batch(model, params, workers);
    DensityModel pf = fit_gkde(qois, rule);
    return {std::move(pf), SampleBatch(std::move(params), std::move(qois), seed, model.name())};
}

PosteriorHandle::PosteriorHandle(DensityModel prior, DensityModel observed, DensityModel pushforward,
                                 ForwardModel model, double ratio_floor)
    : prior_(std::move(prior)),
      observed_(std::move(observed)),
      pushforward_(std::move(pushforward)),
      model_(std::move(model)),
      floor_(ratio_floor) {
    require(prior_.dim() == model_.in_dim(), ErrorKind::Input, "prior dimension does not match model input");
    require(observed_.dim() == model_.out_dim() && pushforward_.dim() == model_.out_dim(), ErrorKind::Input,
            "observed and push-forward dimensions must match the model output");
    require(floor_ > 0.0, ErrorKind::Input, "ratio floor must be positive");
}

double PosteriorHandle::ratio(std::span<const double> q, std::size_t* violations) const {
    const double obs = observed_.pdf(q);
    if (obs == 0.0) return 0.0;
    double pf = pushforward_.pdf(q);
    if (pf <= floor_) {
        if (violations) ++*violations;
        pf = floor_;
    }
    return obs / pf;
}

double PosteriorHandle::posterior_pdf(std::span<const double> lambda,
                                      std::optional<std::span<const double>> cached_q) const {
    const double p = prior_.pdf(lambda);
    if (p == 0.0) return 0.0;
    if (cached_q) {
        require(cached_q->size() == model_.out_dim(), ErrorKind::Input, "cached QoI has wrong length");
        return p * ratio(*cached_q);
    }
    const std::vector<double> q = model_(lambda);
    return p * ratio(q);
}

std::vector<double> PosteriorHandle::ratios(const Matrix& qois, std::size_t workers, std::size_t* violations) const {
    require(qois.cols() == model_.out_dim(), ErrorKind::Input, "QoI matrix has wrong width");
    std::vector<double> out(qois.rows());
    std::vector<unsigned char> floored(qois.rows(), 0);
    parallel_for(qois.rows(), workers, [&](std::size_t i) {
        std::size_t v = 0;
        out[i] = ratio(qois.row(i), &v);
        floored[i] = v > 0;
    });
    if (violations) {
        for (unsigned char f : floored) *violations += f;
    }
    return out;
}

nlohmann::json Diagnostics::to_json() const {
    return {{"integral_estimate", integral_estimate},
            {"kl_divergence", kl_divergence},
            {"max_ratio", max_ratio},
            {"acceptance_rate", acceptance_rate},
            {"sample_count", sample_count},
            {"accepted_count", accepted_count},
            {"dominance_violations", dominance_violations},
            {"observed_probe_violations", observed_probe_violations},
            {"observed_probe_count", observed_probe_count}};
}

Diagnostics diagnostics_from_ratios(std::span<const double> ratios, std::size_t violations) {
    require(!ratios.empty(), ErrorKind::Input, "diagnostics need a nonempty batch");
    Diagnostics d;
    double sum = 0.0, kl = 0.0, mx = 0.0;
    for (double r : ratios) {
        sum += r;
        if (r > 0.0) kl += r * std::log(r);
        mx = std::max(mx, r);
    }
    const double n = static_cast<double>(ratios.size());
    d.integral_estimate = sum / n;
    d.kl_divergence = kl / n;
    d.max_ratio = mx;
    d.sample_count = ratios.size();
    d.dominance_violations = violations;
    return d;
}

Diagnostics diagnostics(const PosteriorHandle& handle, const SampleBatch& batch, std::size_t workers) {
    require(batch.count() > 0, ErrorKind::Input, "diagnostics need a nonempty batch");
    std::size_t violations = 0;
    const auto r = handle.ratios(batch.qois(), workers, &violations);
    return diagnostics_from_ratios(r, violations);
}

std::size_t dominance_probe(const PosteriorHandle& handle, std::size_t count, RngStream& rng) {
    if (!handle.observed().sampleable() || count == 0) return 0;
    const Matrix probe = handle.observed().sample(count, rng);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < probe.rows(); ++i) {
        if (handle.observed().pdf(probe.row(i)) > 0.0 && handle.pushforward().pdf(probe.row(i)) <= handle.ratio_floor()) {
            ++hits;
        }
    }
    return hits;
}

std::vector<std::size_t> rejection_indices(std::span<const double> weights, RngStream& rng, double inflation) {
    require(inflation >= 1.0, ErrorKind::Input, "rejection inflation factor must be at least 1");
    double mx = 0.0;
    for (double w : weights) mx = std::max(mx, w);
    if (!(mx > 0.0)) {
        fail(ErrorKind::EmptyPosterior, "every weight in the batch is zero; the observed density is incompatible");
    }
    const double bound = inflation * mx;
    std::vector<std::size_t> keep;
    for (std::size_t p = 0; p < weights.size(); ++p) {
        const double xi = rng.uniform();
        if (weights[p] / bound > xi) keep.push_back(p);
    }
    return keep;
}

RejectionResult rejection_sample(const PosteriorHandle& handle, const SampleBatch& batch, RngStream& rng,
                                 double inflation, std::size_t workers) {
    require(batch.count() > 0, ErrorKind::Input, "rejection sampling needs a nonempty batch");
    std::size_t violations = 0;
    std::vector<double> r = handle.ratios(batch.qois(), workers, &violations);
    Diagnostics d = diagnostics_from_ratios(r, violations);
    const auto keep = rejection_indices(r, rng, inflation);
    d.accepted_count = keep.size();
    d.acceptance_rate = static_cast<double>(keep.size()) / static_cast<double>(batch.count());
    return {batch.select(keep), d, std::move(r)};
}

double set_posterior_probability(const PosteriorHandle& handle, const ParameterDomain& box, const SampleBatch& batch,
                                 std::size_t min_rows) {
    if (handle.model().out_dim() != 1) {
        fail(ErrorKind::Unsupported, "set-based posterior is only implemented for a scalar QoI");
    }
    require(box.dim() == batch.param_dim(), ErrorKind::Input, "box dimension does not match the batch");
    require(batch.count() > 0, ErrorKind::Input, "set-based posterior needs a nonempty batch");
    std::size_t inside = 0;
    double qlo = kInf, qhi = -kInf;
    for (std::size_t i = 0; i < batch.count(); ++i) {
        if (!box.contains(batch.params().row(i))) continue;
        ++inside;
        qlo = std::min(qlo, batch.qois()(i, 0));
        qhi = std::max(qhi, batch.qois()(i, 0));
    }
    if (inside == 0) return 0.0;
    require(inside >= min_rows, ErrorKind::InsufficientCoverage,
            "only " + std::to_string(inside) + " batch rows fall in the box; need " + std::to_string(min_rows));
    const double p_prior = static_cast<double>(inside) / static_cast<double>(batch.count());
    if (qhi == qlo) {
        // Point image: the probability ratio degenerates to the density ratio.
        const double q[1] = {qlo};
        return p_prior * handle.ratio(q);
    }
    constexpr std::size_t nodes = 4001;
    const double p_obs = trapezoid([&](double q) { return handle.observed().pdf(q); }, qlo, qhi, nodes);
    const double p_pf = trapezoid([&](double q) { return handle.pushforward().pdf(q); }, qlo, qhi, nodes);
    require(p_pf > 0.0, ErrorKind::Dominance, "push-forward assigns zero probability to the image of the box");
    return p_prior * p_obs / p_pf;
}

}  // namespace cbayes
