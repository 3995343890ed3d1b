#pragma once

#include <vector>

#include "cbayes/core.hpp"
#include "cbayes/density.hpp"

namespace cbayes {

/// Additive Gaussian noise model q_hat = Q(lambda) + eta, eta ~ N(0, diag(sigma^2)).
struct LikelihoodSpec {
    std::vector<double> datum;
    std::vector<double> sigma;

    void validate() const;
};

/// Density of q_hat - q under N(0, diag(sigma^2)).
double likelihood_at(const LikelihoodSpec& spec, std::span<const double> q);
/// Same with q = Q(lambda).
double likelihood(const LikelihoodSpec& spec, const ForwardModel& model, std::span<const double> lambda);

/// Rejection sampling of prior x likelihood on an existing prior batch, using
/// the batch's stored QoIs. Throws EmptyPosterior if every likelihood is zero.
SampleBatch statistical_posterior_rejection(const LikelihoodSpec& spec, const SampleBatch& prior_batch,
                                            RngStream& rng);

struct PushforwardComparison {
    double tv_consistent = 0.0;
    double tv_statistical = 0.0;
};

/// Fits a 1-D KDE to the QoIs of each accepted batch and measures its TV
/// distance to the observed density by quadrature.
PushforwardComparison pushforward_compare(const SampleBatch& consistent_accepted,
                                          const SampleBatch& statistical_accepted, const DensityModel& observed,
                                          const BandwidthRule& rule = BandwidthRule::silverman());

}  // namespace cbayes
