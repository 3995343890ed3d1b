#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cbayes/baselines.hpp"
#include "cbayes/inference.hpp"
#include "cbayes/metrics.hpp"
#include "cbayes/models.hpp"
#include "json.hpp"

namespace cbayes {

struct PipelineOptions {
    BandwidthRule rule = BandwidthRule::silverman();
    std::size_t workers = 1;
    double inflation = 1.0;
    /// Points drawn from the observed density for the dominance probe.
    std::size_t probe_count = 1000;
};

struct ExperimentReport {
    std::string experiment_id;
    nlohmann::json config;
    Diagnostics diagnostics;
    /// TV between the push-forward of the prior and the observed density.
    std::optional<double> tv_pushforward_prior_vs_observed;
    /// TV between a KDE of the accepted QoIs and the observed density; unset
    /// when fewer than two samples were accepted.
    std::optional<double> tv_pushforward_posterior_vs_observed;
    std::size_t accepted_count = 0;
    /// Experiment-specific scalars (support gap, comparison TVs, ...).
    std::map<std::string, double> extra;
    std::vector<ConvergenceRecord> convergence;
    double wall_ms = 0.0;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
};

/// Runs sampling, push-forward KDE, diagnostics, dominance probe, rejection,
/// and both push-forward TVs. Streams: split(0) prior, split(1) rejection,
/// split(2) probe.
struct PipelineOutput {
    ExperimentReport report;
    SampleBatch prior_batch;
    SampleBatch accepted;
    DensityModel pushforward;
};

PipelineOutput run_pipeline(const std::string& experiment_id, const ForwardModel& model, const DensityModel& prior,
                            const DensityModel& observed, std::size_t count, std::uint64_t seed,
                            const PipelineOptions& options = {});

enum class NonlinearPrior { Uniform, Beta25 };
NonlinearPrior parse_nonlinear_prior(const std::string& name);

/// Observed density N(0.3, 0.025^2), untruncated.
DensityModel nonlinear_observed();
DensityModel nonlinear_prior(NonlinearPrior kind);
ExperimentReport run_nonlinear_system(NonlinearPrior prior, std::size_t count, std::uint64_t seed,
                                      const PipelineOptions& options = {});

/// Default options for the piecewise run: likelihood cross-validated
/// bandwidth, which resolves the gaps in the disconnected image.
PipelineOptions piecewise_options();
/// Observed N(observed_mean, 0.25^2) on the piecewise map over [-1, 1]^2.
/// extra["support_gap"] is the longest run inside the sampled QoI range where
/// the push-forward KDE drops below 1e-6.
ExperimentReport run_piecewise(std::size_t count, std::uint64_t seed, const PipelineOptions& options = piecewise_options(),
                               double observed_mean = -2.0);

/// Longest interval strictly inside [lo, hi] on which pdf < threshold, on a
/// grid of `nodes` points. Intervals touching either end do not count.
double support_gap(const DensityModel& pdf, double lo, double hi, double threshold = 1e-6, std::size_t nodes = 4001);

struct ConvergenceConfig {
    std::vector<std::size_t> dims{2, 10, 100};
    std::vector<std::size_t> qoi_counts{1};
    std::vector<std::size_t> sample_sizes{100, 316, 1000, 3162, 10000};
    std::size_t reps = 20;
    std::uint64_t seed = 1;
    std::size_t eval_count = 10000;
    BlockQuantile block_quantile = BlockQuantile::MassPreserving;
    /// C_i = A_i^T A_i from a seeded standard-normal A_i when true, identity otherwise.
    bool random_covariance = true;
    std::size_t workers = 1;
};

struct ConvergenceRow {
    std::size_t dim, qoi_count, sample_size, rep;
    double l1_error;
    std::size_t violations;
};

struct ConvergenceResult {
    std::vector<ConvergenceRecord> records;
    std::vector<ConvergenceRow> rows;
};

/// For every (d, m) pair: per repetition, one prior sample of the largest
/// size whose prefixes feed the KDEs, plus a separate evaluation sample.
/// Records hold medians over repetitions and the fitted slope (unset when
/// fewer than three sample sizes are given).
ConvergenceResult run_chi2_convergence(const ConvergenceConfig& config);

/// Errors c * N^exponent with no noise; a self-test for the slope fit.
ConvergenceResult synthetic_power_law(const std::vector<std::size_t>& sample_sizes, double exponent, double scale = 1.0);

struct ComparisonReport {
    int power = 1;
    std::size_t count = 0;
    std::uint64_t seed = 0;
    double tv_consistent = 0.0;
    double tv_statistical = 0.0;
    /// TV between KDEs of the accepted parameters of both methods.
    double tv_between_posteriors = 0.0;
    std::size_t consistent_accepted = 0;
    std::size_t statistical_accepted = 0;
    Diagnostics diagnostics;
    double wall_ms = 0.0;

    nlohmann::json to_json() const;
};

/// Monomial map with a uniform prior on [-1, 1]. Observed density is the
/// unnormalized N(datum, sigma^2) clipped to the image; the statistical run
/// uses the matching Gaussian likelihood on the same prior samples.
ComparisonReport run_comparison(int power, std::size_t count, std::uint64_t seed, const PipelineOptions& options = {},
                                double datum = 0.25, double sigma = 0.1);

struct StabilityReport {
    double delta = 0.0;
    double a = 0.0, b = 0.0;
    double tv_obs_pair = 0.0;
    double tv_post_pair = 0.0;

    nlohmann::json to_json() const;
};

/// q = lambda^2 with a standard normal prior (exact push-forward chi2_1).
/// Compares the posteriors for observed U(a, b) and U(a + delta, b + delta),
/// a and b being the 0.4 and 0.6 quantiles. Throws Dominance when the
/// shifted interval leaves the image.
StabilityReport run_stability_oracle(double delta, std::size_t nodes = 20001);
ForwardModel square_model();

/// Midpoint rule for the posterior density over a 2-D box, n x n cells.
double posterior_mass_quadrature(const PosteriorHandle& handle, Interval x, Interval y, std::size_t n);

/// Posterior mass over [-6, 6]^2 for the d = 2, C = I quadratic model with the
/// exact chi2_2 push-forward and the quantile-matched observed density.
double run_mass_oracle(std::size_t n = 2000);

struct ErrorBoundRecord {
    std::uint64_t seed = 0;
    double tv_posterior = 0.0;
    double constant = 0.0;
    double tv_pushforward = 0.0;

    double bound() const noexcept { return constant * tv_pushforward; }
    nlohmann::json to_json() const;
};

/// d = 2, C = I quadratic model: exact chi2_2 push-forward against a KDE from
/// `count` prior samples. The posterior TV is a midpoint rule over [-6, 6]^2,
/// the push-forward TV a 1-D rule, and the constant the largest observed /
/// KDE ratio on the observed support.
ErrorBoundRecord run_error_bound(std::uint64_t seed, std::size_t count = 1000, std::size_t grid = 1200);

}  // namespace cbayes
