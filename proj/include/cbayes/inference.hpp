#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cbayes/core.hpp"
#include "cbayes/density.hpp"
#include "json.hpp"

namespace cbayes {

struct PushforwardResult {
    DensityModel pushforward;
    SampleBatch batch;
};

/// Samples M points from the prior, evaluates the model on each, and fits a
/// KDE to the resulting QoIs. The batch is returned so later stages can reuse
/// the model evaluations.
PushforwardResult build_pushforward(const ForwardModel& model, const DensityModel& prior, std::size_t count,
                                    RngStream& rng, const BandwidthRule& rule = BandwidthRule::silverman(),
                                    std::size_t workers = 1);

/// The posterior prior(lambda) * observed(Q(lambda)) / pushforward(Q(lambda)).
///
/// Push-forward values at or below ratio_floor are replaced by the floor and
/// reported through the optional violation counter, since they mean the
/// observed density is not dominated there.
class PosteriorHandle {
public:
    static constexpr double kDefaultFloor = 1e-12;

    PosteriorHandle(DensityModel prior, DensityModel observed, DensityModel pushforward, ForwardModel model,
                    double ratio_floor = kDefaultFloor);

    const DensityModel& prior() const noexcept { return prior_; }
    const DensityModel& observed() const noexcept { return observed_; }
    const DensityModel& pushforward() const noexcept { return pushforward_; }
    const ForwardModel& model() const noexcept { return model_; }
    double ratio_floor() const noexcept { return floor_; }

    /// r(q). Increments *violations when the push-forward was floored.
    double ratio(std::span<const double> q, std::size_t* violations = nullptr) const;

    /// Zero outside the prior support without evaluating the model; otherwise
    /// uses `cached_q` when given and a fresh model evaluation when not.
    double posterior_pdf(std::span<const double> lambda,
                         std::optional<std::span<const double>> cached_q = std::nullopt) const;

    /// r at every row of `qois`, in row order.
    std::vector<double> ratios(const Matrix& qois, std::size_t workers = 1, std::size_t* violations = nullptr) const;

private:
    DensityModel prior_;
    DensityModel observed_;
    DensityModel pushforward_;
    ForwardModel model_;
    double floor_;
};

struct Diagnostics {
    double integral_estimate = 0.0;
    double kl_divergence = 0.0;
    double max_ratio = 0.0;
    /// Filled by rejection_sample; zero before.
    double acceptance_rate = 0.0;
    std::size_t sample_count = 0;
    std::size_t accepted_count = 0;
    /// Batch points where the observed density is positive but the
    /// push-forward fell to the floor.
    std::size_t dominance_violations = 0;
    /// Same test at points drawn from the observed density (see
    /// dominance_probe). A KDE is positive at every batch point, so gaps in
    /// its support only show up here.
    std::size_t observed_probe_violations = 0;
    std::size_t observed_probe_count = 0;

    std::size_t total_violations() const noexcept { return dominance_violations + observed_probe_violations; }
    nlohmann::json to_json() const;
};

/// I = mean r, KL = mean r log r (0 log 0 = 0), and max r over the batch.
Diagnostics diagnostics(const PosteriorHandle& handle, const SampleBatch& batch, std::size_t workers = 1);
/// Same from precomputed ratios.
Diagnostics diagnostics_from_ratios(std::span<const double> ratios, std::size_t violations);

/// Draws `count` points from the observed density and counts those where the
/// push-forward is at or below the ratio floor. Returns 0 when the observed
/// density cannot be sampled.
std::size_t dominance_probe(const PosteriorHandle& handle, std::size_t count, RngStream& rng);

/// Accepts index p when weights[p] / (inflation * max weight) > xi_p. One xi is
/// drawn per row, in row order, whatever the outcome. Throws EmptyPosterior
/// when every weight is zero.
std::vector<std::size_t> rejection_indices(std::span<const double> weights, RngStream& rng, double inflation = 1.0);

struct RejectionResult {
    SampleBatch accepted;
    Diagnostics diagnostics;
    std::vector<double> ratios;
};

RejectionResult rejection_sample(const PosteriorHandle& handle, const SampleBatch& batch, RngStream& rng,
                                 double inflation = 1.0, std::size_t workers = 1);

/// P_prior(B) * P_obs(Q(B)) / P_pf(Q(B)) for a box B and scalar QoI. Q(B) is
/// approximated by the hull of the batch QoIs whose parameters fall in B, and
/// both image probabilities come from 1-D quadrature.
double set_posterior_probability(const PosteriorHandle& handle, const ParameterDomain& box, const SampleBatch& batch,
                                 std::size_t min_rows = 100);

}  // namespace cbayes
