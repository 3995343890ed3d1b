#include "cbayes/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "cbayes/special.hpp"

namespace cbayes {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

/// KDE of the accepted QoIs against the observed density, when it can be formed.
std::optional<double> posterior_pushforward_tv(const SampleBatch& accepted, const DensityModel& observed) {
    if (accepted.qoi_dim() != 1 || accepted.count() < 2) return std::nullopt;
    try {
        return tv_distance_quadrature(fit_gkde(accepted.qois()), observed);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::DegenerateData) return std::nullopt;
        throw;
    }
}

}  // namespace

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json j{{"experiment_id", experiment_id},
                     {"config", config},
                     {"diagnostics", diagnostics.to_json()},
                     {"tv_pushforward_prior_vs_observed", optional_json(tv_pushforward_prior_vs_observed)},
                     {"tv_pushforward_posterior_vs_observed", optional_json(tv_pushforward_posterior_vs_observed)},
                     {"accepted_count", accepted_count},
                     {"wall_ms", wall_ms},
                     {"seed", seed}};
    j["extra"] = nlohmann::json::object();
    for (const auto& [k, v] : extra) j["extra"][k] = v;
    if (!convergence.empty()) {
        j["convergence"] = nlohmann::json::array();
        for (const auto& r : convergence) j["convergence"].push_back(r.to_json());
    }
    return j;
}

PipelineOutput run_pipeline(const std::string& experiment_id, const ForwardModel& model, const DensityModel& prior,
                            const DensityModel& observed, std::size_t count, std::uint64_t seed,
                            const PipelineOptions& options) {
    const auto t0 = Clock::now();
    const RngStream root(seed);
    RngStream prior_rng = root.split(0), reject_rng = root.split(1), probe_rng = root.split(2);

    PushforwardResult pf = build_pushforward(model, prior, count, prior_rng, options.rule, options.workers);
    const PosteriorHandle handle(prior, observed, pf.pushforward, model);
    RejectionResult rej = rejection_sample(handle, pf.batch, reject_rng, options.inflation, options.workers);

    ExperimentReport report;
    report.experiment_id = experiment_id;
    report.seed = seed;
    report.config = {{"model", model.name()},
                     {"prior", prior.describe()},
                     {"observed", observed.describe()},
                     {"samples", count},
                     {"seed", seed},
                     {"bandwidth_rule", options.rule.name()},
                     {"inflation", options.inflation},
                     {"probe_count", options.probe_count}};
    report.diagnostics = rej.diagnostics;
    if (observed.sampleable()) {
        report.diagnostics.observed_probe_count = options.probe_count;
        report.diagnostics.observed_probe_violations = dominance_probe(handle, options.probe_count, probe_rng);
    }
    report.accepted_count = rej.accepted.count();
    report.extra["pushforward_bandwidth"] = pf.pushforward.as_kde()->bandwidth()[0];
    if (model.out_dim() == 1) {
        report.tv_pushforward_prior_vs_observed = tv_distance_quadrature(pf.pushforward, observed);
        report.tv_pushforward_posterior_vs_observed = posterior_pushforward_tv(rej.accepted, observed);
    }
    report.wall_ms = elapsed_ms(t0);
    return {std::move(report), std::move(pf.batch), std::move(rej.accepted), std::move(pf.pushforward)};
}

NonlinearPrior parse_nonlinear_prior(const std::string& name) {
    if (name == "uniform") return NonlinearPrior::Uniform;
    if (name == "beta25") return NonlinearPrior::Beta25;
    fail(ErrorKind::Config, "unknown prior '" + name + "' (expected uniform or beta25)");
}

DensityModel nonlinear_observed() { return normal(0.3, 0.025); }

DensityModel nonlinear_prior(NonlinearPrior kind) {
    const ParameterDomain box = nonlinear_system_domain();
    return kind == NonlinearPrior::Uniform ? uniform_box(box) : beta(2.0, 5.0, box);
}

ExperimentReport run_nonlinear_system(NonlinearPrior prior, std::size_t count, std::uint64_t seed,
                                      const PipelineOptions& options) {
    require(count >= 100, ErrorKind::Input, "nonlinear-system experiment needs at least 100 samples");
    const std::string id = prior == NonlinearPrior::Uniform ? "nonlinear-uniform" : "nonlinear-beta25";
    auto out = run_pipeline(id, nonlinear_system(), nonlinear_prior(prior), nonlinear_observed(), count, seed, options);
    return std::move(out.report);
}

PipelineOptions piecewise_options() {
    PipelineOptions o;
    o.rule = BandwidthRule::likelihood_cv();
    return o;
}

double support_gap(const DensityModel& pdf, double lo, double hi, double threshold, std::size_t nodes) {
    require(nodes >= 3 && hi > lo, ErrorKind::Input, "support gap scan needs a nonempty range");
    const double h = (hi - lo) / static_cast<double>(nodes - 1);
    double best = 0.0;
    std::optional<std::size_t> last_above;
    for (std::size_t i = 0; i < nodes; ++i) {
        if (pdf.pdf(lo + h * static_cast<double>(i)) < threshold) continue;
        if (last_above && i > *last_above + 1) {
            best = std::max(best, h * static_cast<double>(i - *last_above - 1));
        }
        last_above = i;
    }
    return best;
}

ExperimentReport run_piecewise(std::size_t count, std::uint64_t seed, const PipelineOptions& options,
                               double observed_mean) {
    const ParameterDomain box = ParameterDomain::cube(2, -1.0, 1.0);
    auto out = run_pipeline("piecewise-2d", piecewise_smooth(2), uniform_box(box), normal(observed_mean, 0.25), count,
                            seed, options);
    const auto q = out.prior_batch.qois().column(0);
    const auto [qmin, qmax] = std::minmax_element(q.begin(), q.end());
    out.report.extra["support_gap"] = support_gap(out.pushforward, *qmin, *qmax);
    out.report.extra["observed_mean"] = observed_mean;
    return std::move(out.report);
}

ConvergenceResult run_chi2_convergence(const ConvergenceConfig& config) {
    require(config.reps >= 1, ErrorKind::Input, "convergence study needs at least one repetition");
    require(!config.sample_sizes.empty(), ErrorKind::Input, "convergence study needs sample sizes");
    require(config.eval_count >= 1, ErrorKind::Input, "convergence study needs evaluation samples");
    for (std::size_t n : config.sample_sizes) require(n >= 2, ErrorKind::Input, "KDE sample sizes must be at least 2");
    const std::size_t n_max = *std::max_element(config.sample_sizes.begin(), config.sample_sizes.end());
    const RngStream root(config.seed);

    ConvergenceResult result;
    std::uint64_t pair_index = 0;
    for (std::size_t d : config.dims) {
        for (std::size_t m : config.qoi_counts) {
            QuadraticFormSpec spec{d, m, std::nullopt, {}};
            if (config.random_covariance) spec.covariance_seed = splitmix64(config.seed ^ (d * 1024 + m));
            const QuadraticModel qm = quadratic_chi2(spec);
            const DensityModel observed = quantile_matched_uniform_observed(d, m, config.block_quantile);
            const RngStream pair_rng = root.split(pair_index++);

            const std::size_t ns = config.sample_sizes.size();
            std::vector<std::vector<L1Error>> errs(config.reps, std::vector<L1Error>(ns));
            parallel_for(config.reps, config.workers, [&](std::size_t r) {
                const RngStream rep_rng = pair_rng.split(r);
                RngStream train_rng = rep_rng.split(0), eval_rng = rep_rng.split(1);
                const Matrix train = evaluate_batch(qm.model, qm.prior.sample(n_max, train_rng));
                const Matrix eval = evaluate_batch(qm.model, qm.prior.sample(config.eval_count, eval_rng));
                for (std::size_t i = 0; i < ns; ++i) {
                    const DensityModel kde = fit_gkde(train.head(config.sample_sizes[i]));
                    errs[r][i] = posterior_l1_error(qm.exact_pushforward, kde, observed, eval);
                }
            });

            ConvergenceRecord rec;
            rec.dim = d;
            rec.qoi_count = m;
            rec.repetitions = config.reps;
            rec.errors_by_rep.assign(ns, std::vector<double>(config.reps));
            for (std::size_t i = 0; i < ns; ++i) {
                rec.sample_sizes.push_back(static_cast<double>(config.sample_sizes[i]));
                for (std::size_t r = 0; r < config.reps; ++r) {
                    rec.errors_by_rep[i][r] = errs[r][i].value;
                    result.rows.push_back(
                        {d, m, config.sample_sizes[i], r, errs[r][i].value, errs[r][i].violations});
                }
                rec.errors.push_back(median(rec.errors_by_rep[i]));
            }
            const bool fittable = ns >= 3 && std::all_of(rec.errors.begin(), rec.errors.end(),
                                                         [](double e) { return e > 0.0; });
            if (fittable) fit_rate(rec);
            result.records.push_back(std::move(rec));
        }
    }
    return result;
}

ConvergenceResult synthetic_power_law(const std::vector<std::size_t>& sample_sizes, double exponent, double scale) {
    ConvergenceRecord rec;
    rec.repetitions = 1;
    ConvergenceResult result;
    for (std::size_t n : sample_sizes) {
        const double e = scale * std::pow(static_cast<double>(n), exponent);
        rec.sample_sizes.push_back(static_cast<double>(n));
        rec.errors.push_back(e);
        rec.errors_by_rep.push_back({e});
        result.rows.push_back({0, 0, n, 0, e, 0});
    }
    if (rec.sample_sizes.size() >= 3) fit_rate(rec);
    result.records.push_back(std::move(rec));
    return result;
}

nlohmann::json ComparisonReport::to_json() const {
    return {{"power", power},
            {"samples", count},
            {"seed", seed},
            {"tv_consistent", tv_consistent},
            {"tv_statistical", tv_statistical},
            {"tv_between_posteriors", tv_between_posteriors},
            {"consistent_accepted", consistent_accepted},
            {"statistical_accepted", statistical_accepted},
            {"diagnostics", diagnostics.to_json()},
            {"wall_ms", wall_ms}};
}

ComparisonReport run_comparison(int power, std::size_t count, std::uint64_t seed, const PipelineOptions& options,
                                double datum, double sigma) {
    const auto t0 = Clock::now();
    const ForwardModel model = monomial(power);
    const DensityModel prior = uniform_box(ParameterDomain::cube(1, -1.0, 1.0));
    const DensityModel observed = truncated_normal(datum, sigma, -1.0, 1.0, false);
    auto consistent = run_pipeline("comparison", model, prior, observed, count, seed, options);

    RngStream stat_rng = RngStream(seed).split(3);
    const SampleBatch statistical =
        statistical_posterior_rejection({{datum}, {sigma}}, consistent.prior_batch, stat_rng);
    const PushforwardComparison cmp = pushforward_compare(consistent.accepted, statistical, observed);

    ComparisonReport r;
    r.power = power;
    r.count = count;
    r.seed = seed;
    r.tv_consistent = cmp.tv_consistent;
    r.tv_statistical = cmp.tv_statistical;
    r.tv_between_posteriors =
        tv_distance_quadrature(fit_gkde(consistent.accepted.params()), fit_gkde(statistical.params()));
    r.consistent_accepted = consistent.accepted.count();
    r.statistical_accepted = statistical.count();
    r.diagnostics = consistent.report.diagnostics;
    r.wall_ms = elapsed_ms(t0);
    return r;
}

nlohmann::json StabilityReport::to_json() const {
    return {{"delta", delta}, {"a", a}, {"b", b}, {"tv_obs_pair", tv_obs_pair}, {"tv_post_pair", tv_post_pair}};
}

ForwardModel square_model() {
    return ForwardModel("square", 1, 1, [](std::span<const double> x, std::span<double> out) { out[0] = x[0] * x[0]; });
}

StabilityReport run_stability_oracle(double delta, std::size_t nodes) {
    const double a = chi2_quantile(1.0, 0.4), b = chi2_quantile(1.0, 0.6);
    const DensityModel pf = chi_squared(1.0);
    const DensityModel obs = uniform_interval(a, b);
    const DensityModel obs2 = uniform_interval(a + delta, b + delta);

    // Dominance: the push-forward has to be positive wherever the shifted
    // observed density is.
    const double h = (b - a) / static_cast<double>(nodes - 1);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double q = a + delta + h * static_cast<double>(i);
        if (pf.pdf(q) <= PosteriorHandle::kDefaultFloor) {
            fail(ErrorKind::Dominance, "shifted observed interval leaves the push-forward support at q = " +
                                           std::to_string(q));
        }
    }

    const ForwardModel model = square_model();
    const DensityModel prior = standard_normal(1);
    const PosteriorHandle post(prior, obs, pf, model), post2(prior, obs2, pf, model);

    StabilityReport r;
    r.delta = delta;
    r.a = a;
    r.b = b;
    const double lo = std::min(a, a + delta), hi = std::max(b, b + delta);
    r.tv_obs_pair = tv_distance_quadrature([&](double q) { return obs.pdf(q); }, [&](double q) { return obs2.pdf(q); },
                                           {lo - 1.0, hi + 1.0}, nodes, {a, b, a + delta, b + delta});
    std::vector<double> cuts;
    for (double q : {a, b, a + delta, b + delta}) {
        cuts.push_back(std::sqrt(q));
        cuts.push_back(-std::sqrt(q));
    }
    const double reach = std::sqrt(hi) + 1.0;
    r.tv_post_pair = tv_distance_quadrature(
        [&](double x) { return post.posterior_pdf(std::span<const double>(&x, 1)); },
        [&](double x) { return post2.posterior_pdf(std::span<const double>(&x, 1)); }, {-reach, reach}, nodes, cuts);
    return r;
}

double posterior_mass_quadrature(const PosteriorHandle& handle, Interval x, Interval y, std::size_t n) {
    require(handle.prior().dim() == 2, ErrorKind::Input, "2-D quadrature needs a 2-D parameter");
    require(n >= 1 && x.finite() && y.finite(), ErrorKind::Input, "quadrature box must be finite");
    const double hx = x.width() / static_cast<double>(n), hy = y.width() / static_cast<double>(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double p[2] = {x.lower + hx * (static_cast<double>(i) + 0.5), y.lower + hy * (static_cast<double>(j) + 0.5)};
            row += handle.posterior_pdf(p);
        }
        total += row;
    }
    return total * hx * hy;
}

double run_mass_oracle(std::size_t n) {
    const QuadraticModel qm = quadratic_chi2({2, 1, std::nullopt, {}});
    const PosteriorHandle handle(qm.prior, quantile_matched_uniform_observed(2, 1), qm.exact_pushforward, qm.model);
    return posterior_mass_quadrature(handle, {-6.0, 6.0}, {-6.0, 6.0}, n);
}

nlohmann::json ErrorBoundRecord::to_json() const {
    return {{"seed", seed}, {"tv_posterior", tv_posterior}, {"constant", constant}, {"tv_pushforward", tv_pushforward},
            {"bound", bound()}};
}

ErrorBoundRecord run_error_bound(std::uint64_t seed, std::size_t count, std::size_t grid) {
    const QuadraticModel qm = quadratic_chi2({2, 1, std::nullopt, {}});
    const DensityModel observed = quantile_matched_uniform_observed(2, 1);
    RngStream rng(seed);
    const PushforwardResult pf = build_pushforward(qm.model, qm.prior, count, rng);
    const PosteriorHandle exact(qm.prior, observed, qm.exact_pushforward, qm.model);
    const PosteriorHandle approx(qm.prior, observed, pf.pushforward, qm.model);

    ErrorBoundRecord r;
    r.seed = seed;
    const double h = 12.0 / static_cast<double>(grid);
    double total = 0.0;
    for (std::size_t i = 0; i < grid; ++i) {
        for (std::size_t j = 0; j < grid; ++j) {
            const double lam[2] = {-6.0 + h * (static_cast<double>(i) + 0.5), -6.0 + h * (static_cast<double>(j) + 0.5)};
            const std::vector<double> q = qm.model(lam);
            if (observed.pdf(q) == 0.0) continue;
            total += std::abs(exact.posterior_pdf(lam, q) - approx.posterior_pdf(lam, q));
        }
    }
    r.tv_posterior = total * h * h;

    const Interval obs_support = observed.support_range(0);
    const std::size_t nodes = 20001;
    const double hq = obs_support.width() / static_cast<double>(nodes - 1);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double q = obs_support.lower + hq * static_cast<double>(i);
        r.constant = std::max(r.constant, observed.pdf(q) / pf.pushforward.pdf(q));
    }
    r.tv_pushforward = tv_distance_quadrature(qm.exact_pushforward, pf.pushforward);
    return r;
}

}  // namespace cbayes
