#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cbayes/core.hpp"
#include "cbayes/density.hpp"
#include "cbayes/experiments.hpp"
#include "cbayes/models.hpp"
#include "json.hpp"

namespace cbayes {

/// Run configuration read from a JSON object. Unknown keys are rejected, and
/// every field is echoed back by to_json() for provenance.
struct RunConfig {
    std::string experiment_id = "run";
    std::string model = "nonlinear-system";
    /// Density specs in the same shape DensityModel::describe() emits.
    /// "uniform" and "beta" without bounds take the model's domain;
    /// {"kind": "quantile_matched"} builds the chi2 observed box.
    nlohmann::json prior = {{"kind", "uniform"}};
    nlohmann::json observed = {{"kind", "normal"}, {"mean", 0.3}, {"std", 0.025}};
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    BandwidthRule bandwidth = BandwidthRule::silverman();
    std::string output_dir = "out";
    BlockQuantile block_quantile = BlockQuantile::MassPreserving;
    bool renormalize_truncated_normal = false;
    double safety_factor = 1.0;
    std::size_t workers = 1;
    std::size_t probe_count = 1000;
    /// Exit with the dominance code when batch + probe violations exceed this.
    std::size_t dominance_threshold = 0;

    // converge
    std::vector<std::size_t> dims{2, 10, 100};
    std::vector<std::size_t> qoi_counts{1};
    std::vector<std::size_t> sample_sizes{100, 316, 1000, 3162, 10000};
    std::size_t reps = 20;
    std::size_t eval_count = 10000;
    bool random_covariance = true;
    bool synthetic = false;
    double synthetic_exponent = -0.4;

    // compare
    std::vector<int> powers{1, 5};
    double datum = 0.25;
    double sigma = 0.1;

    // stability
    std::vector<double> deltas{0.01, 0.05, 0.1};

    static RunConfig from_json(const nlohmann::json& j);
    /// Throws MissingInput when the file does not exist and Config (with the
    /// line number) when it is not valid JSON.
    static RunConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    PipelineOptions pipeline_options() const;
    ConvergenceConfig convergence_config() const;
};

struct DensityContext {
    std::optional<ParameterDomain> domain;
    std::size_t param_dim = 0;
    std::size_t qoi_dim = 0;
    bool renormalize_truncated_normal = false;
    BlockQuantile block_quantile = BlockQuantile::MassPreserving;
};

/// Builds a density from its JSON spec. Errors are Config errors naming `field`.
DensityModel density_from_json(const nlohmann::json& spec, const DensityContext& ctx, const std::string& field);

/// Shortest decimal text that reads back as the same double (17 significant digits).
std::string format_double(double x);

/// CSV with header lambda_1..lambda_n,q_1..q_m.
void write_batch_csv(const std::filesystem::path& path, const SampleBatch& batch);
SampleBatch read_batch_csv(const std::filesystem::path& path, std::uint64_t seed = 0, const std::string& model_name = "");

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Columns d,m,N,rep,l1_error; after each (d, m) block a summary row with
/// N = "slope", rep = "fit" and the fitted slope (empty when not fitted) in
/// the last column.
void write_convergence_csv(const std::filesystem::path& path, const ConvergenceResult& result);
void write_comparison_csv(const std::filesystem::path& path, const std::vector<ComparisonReport>& reports);
void write_stability_csv(const std::filesystem::path& path, const std::vector<StabilityReport>& reports);

}  // namespace cbayes
