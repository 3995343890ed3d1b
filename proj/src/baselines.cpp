#include "cbayes/baselines.hpp"

#include <cmath>

#include "cbayes/inference.hpp"
#include "cbayes/metrics.hpp"
#include "cbayes/special.hpp"

namespace cbayes {

void LikelihoodSpec::validate() const {
    require(!datum.empty(), ErrorKind::Input, "likelihood needs an observed datum");
    require(datum.size() == sigma.size(), ErrorKind::Input, "datum and noise scales differ in length");
    for (double s : sigma) require(s > 0.0, ErrorKind::Input, "noise scales must be strictly positive");
}

double likelihood_at(const LikelihoodSpec& spec, std::span<const double> q) {
    require(q.size() == spec.datum.size(), ErrorKind::Input, "QoI length does not match the datum");
    double value = 1.0;
    for (std::size_t j = 0; j < q.size(); ++j) value *= normal_pdf(spec.datum[j] - q[j], 0.0, spec.sigma[j]);
    return value;
}

double likelihood(const LikelihoodSpec& spec, const ForwardModel& model, std::span<const double> lambda) {
    const std::vector<double> q = model(lambda);
    return likelihood_at(spec, q);
}

SampleBatch statistical_posterior_rejection(const LikelihoodSpec& spec, const SampleBatch& prior_batch,
                                            RngStream& rng) {
    spec.validate();
    require(prior_batch.count() > 0, ErrorKind::Input, "statistical posterior needs a nonempty batch");
    std::vector<double> w(prior_batch.count());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = likelihood_at(spec, prior_batch.qois().row(i));
    return prior_batch.select(rejection_indices(w, rng));
}

PushforwardComparison pushforward_compare(const SampleBatch& consistent_accepted,
                                          const SampleBatch& statistical_accepted, const DensityModel& observed,
                                          const BandwidthRule& rule) {
    require(consistent_accepted.count() > 0 && statistical_accepted.count() > 0, ErrorKind::Input,
            "push-forward comparison needs two nonempty batches");
    const DensityModel kc = fit_gkde(consistent_accepted.qois(), rule);
    const DensityModel ks = fit_gkde(statistical_accepted.qois(), rule);
    return {tv_distance_quadrature(kc, observed), tv_distance_quadrature(ks, observed)};
}

}  // namespace cbayes
