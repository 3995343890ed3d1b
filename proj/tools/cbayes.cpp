// Command-line front end: pushforward, posterior, diagnose, converge, compare,
// stability. Exit codes: 0 ok, 1 other failure, 2 config error, 3 missing
// input, 4 empty posterior, 5 dominance violations above threshold.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cbayes/experiments.hpp"
#include "cbayes/inference.hpp"
#include "cbayes/io.hpp"
#include "cbayes/models.hpp"

namespace fs = std::filesystem;
using namespace cbayes;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitMissing = 3;
constexpr int kExitEmpty = 4;
constexpr int kExitDominance = 5;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> workers;
    std::optional<std::string> block_quantile;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "JSON run configuration");
    cmd->add_option("--seed", f.seed, "Override the configured seed");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--workers", f.workers, "Worker threads for batch evaluation")->check(CLI::PositiveNumber);
    cmd->add_option("--block-quantile", f.block_quantile, "Observed box levels for the block chi2 model")
        ->check(CLI::IsMember({"paper", "mass-preserving"}));
}

RunConfig resolve_config(const CommonFlags& f) {
    RunConfig c = f.config.empty() ? RunConfig{} : RunConfig::load(f.config);
    if (f.seed) c.seed = *f.seed;
    if (f.out) c.output_dir = *f.out;
    if (f.workers) c.workers = *f.workers;
    if (f.block_quantile) c.block_quantile = parse_block_quantile(*f.block_quantile);
    return c;
}

struct Problem {
    RegisteredModel reg;
    DensityModel prior;
    DensityModel observed;
};

Problem build_problem(const RunConfig& c) {
    RegisteredModel reg = make_registered_model(c.model);
    DensityContext pctx{reg.domain, reg.model.in_dim(), reg.model.out_dim(), c.renormalize_truncated_normal,
                        c.block_quantile};
    DensityModel prior = density_from_json(c.prior, pctx, "prior");
    DensityContext octx = pctx;
    octx.domain.reset();
    DensityModel observed = density_from_json(c.observed, octx, "observed");
    if (prior.dim() != reg.model.in_dim()) {
        fail(ErrorKind::Config, "config field 'prior': dimension does not match model '" + c.model + "'");
    }
    if (observed.dim() != reg.model.out_dim()) {
        fail(ErrorKind::Config, "config field 'observed': dimension does not match model '" + c.model + "'");
    }
    return {std::move(reg), std::move(prior), std::move(observed)};
}

fs::path output_dir(const RunConfig& c) {
    fs::path dir(c.output_dir);
    fs::create_directories(dir);
    return dir;
}

int cmd_pushforward(const RunConfig& c) {
    const Problem p = build_problem(c);
    RngStream rng = RngStream(c.seed).split(0);
    const PushforwardResult pf = build_pushforward(p.reg.model, p.prior, c.samples, rng, c.bandwidth, c.workers);
    const fs::path dir = output_dir(c);
    write_batch_csv(dir / "samples.csv", pf.batch);
    const GaussianKde* kde = pf.pushforward.as_kde();
    write_json(dir / "pushforward.json", {{"samples_file", "samples.csv"},
                                          {"model", p.reg.model.name()},
                                          {"seed", c.seed},
                                          {"count", kde->count()},
                                          {"dim", kde->dim()},
                                          {"rule", kde->rule()},
                                          {"bandwidth", kde->bandwidth()},
                                          {"config", c.to_json()}});
    std::cout << "wrote " << pf.batch.count() << " samples to " << (dir / "samples.csv").string() << '\n';
    return 0;
}

struct Loaded {
    Problem problem;
    SampleBatch batch;
    DensityModel pushforward;
};

Loaded load_pushforward(const RunConfig& c) {
    const fs::path dir(c.output_dir);
    const fs::path meta_path = dir / "pushforward.json";
    if (!fs::exists(meta_path)) {
        fail(ErrorKind::MissingInput, meta_path.string() + " not found; run 'pushforward' first");
    }
    const nlohmann::json meta = read_json(meta_path);
    const fs::path samples = dir / meta.at("samples_file").get<std::string>();
    if (!fs::exists(samples)) fail(ErrorKind::MissingInput, samples.string() + " not found");
    Problem p = build_problem(c);
    SampleBatch batch = read_batch_csv(samples, meta.at("seed").get<std::uint64_t>(), meta.at("model").get<std::string>());
    if (batch.param_dim() != p.reg.model.in_dim() || batch.qoi_dim() != p.reg.model.out_dim()) {
        fail(ErrorKind::Config, "sample file does not match model '" + c.model + "'");
    }
    DensityModel kde = make_kde(batch.qois(), meta.at("bandwidth").get<std::vector<double>>(),
                                meta.at("rule").get<std::string>());
    return {std::move(p), std::move(batch), std::move(kde)};
}

int dominance_exit(const RunConfig& c, const Diagnostics& d) {
    if (d.total_violations() > c.dominance_threshold) {
        std::cerr << "error: dominance: " << d.dominance_violations << " batch and " << d.observed_probe_violations
                  << " probe points where the push-forward is at the floor (threshold " << c.dominance_threshold
                  << ")\n";
        return kExitDominance;
    }
    return 0;
}

int cmd_posterior(const RunConfig& c, bool sample) {
    const Loaded in = load_pushforward(c);
    const PosteriorHandle handle(in.problem.prior, in.problem.observed, in.pushforward, in.problem.reg.model);
    const RngStream root(c.seed);
    RngStream reject_rng = root.split(1), probe_rng = root.split(2);

    ExperimentReport report;
    report.experiment_id = c.experiment_id;
    report.config = c.to_json();
    report.seed = c.seed;
    std::optional<SampleBatch> accepted;
    if (sample) {
        RejectionResult rej = rejection_sample(handle, in.batch, reject_rng, c.safety_factor, c.workers);
        report.diagnostics = rej.diagnostics;
        accepted = std::move(rej.accepted);
    } else {
        report.diagnostics = diagnostics(handle, in.batch, c.workers);
    }
    if (in.problem.observed.sampleable()) {
        report.diagnostics.observed_probe_count = c.probe_count;
        report.diagnostics.observed_probe_violations = dominance_probe(handle, c.probe_count, probe_rng);
    }
    if (in.problem.reg.model.out_dim() == 1) {
        report.tv_pushforward_prior_vs_observed = tv_distance_quadrature(in.pushforward, in.problem.observed);
        if (accepted && accepted->count() >= 2) {
            try {
                report.tv_pushforward_posterior_vs_observed =
                    tv_distance_quadrature(fit_gkde(accepted->qois()), in.problem.observed);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::DegenerateData) throw;
            }
        }
    }
    const fs::path dir = output_dir(c);
    if (accepted) {
        report.accepted_count = accepted->count();
        write_batch_csv(dir / "accepted.csv", *accepted);
        write_json(dir / "report.json", report.to_json());
    } else {
        write_json(dir / "diagnostics.json", report.to_json());
    }
    const Diagnostics& d = report.diagnostics;
    std::cout << "I = " << format_double(d.integral_estimate) << "  KL = " << format_double(d.kl_divergence)
              << "  max r = " << format_double(d.max_ratio);
    if (accepted) std::cout << "  accepted = " << d.accepted_count << " (" << format_double(d.acceptance_rate) << ")";
    std::cout << '\n';
    return dominance_exit(c, d);
}

int cmd_converge(const RunConfig& c) {
    const ConvergenceResult result =
        c.synthetic ? synthetic_power_law(c.sample_sizes, c.synthetic_exponent) : run_chi2_convergence(c.convergence_config());
    const fs::path dir = output_dir(c);
    write_convergence_csv(dir / "convergence.csv", result);
    nlohmann::json j{{"config", c.to_json()}, {"records", nlohmann::json::array()}};
    for (const auto& r : result.records) {
        j["records"].push_back(r.to_json());
        std::cout << "d=" << r.dim << " m=" << r.qoi_count << " slope="
                  << (r.fitted_slope ? format_double(*r.fitted_slope) : std::string("n/a")) << '\n';
    }
    write_json(dir / "convergence.json", j);
    return 0;
}

int cmd_compare(const RunConfig& c) {
    std::vector<ComparisonReport> reports;
    for (int p : c.powers) {
        reports.push_back(run_comparison(p, c.samples, c.seed, c.pipeline_options(), c.datum, c.sigma));
        const auto& r = reports.back();
        std::cout << "p=" << p << " tv_consistent=" << format_double(r.tv_consistent)
                  << " tv_statistical=" << format_double(r.tv_statistical) << '\n';
    }
    const fs::path dir = output_dir(c);
    write_comparison_csv(dir / "compare.csv", reports);
    nlohmann::json j{{"config", c.to_json()}, {"reports", nlohmann::json::array()}};
    for (const auto& r : reports) j["reports"].push_back(r.to_json());
    write_json(dir / "compare.json", j);
    return 0;
}

int cmd_stability(const RunConfig& c) {
    std::vector<StabilityReport> reports;
    for (double delta : c.deltas) {
        reports.push_back(run_stability_oracle(delta));
        std::cout << "delta=" << format_double(delta) << " tv_obs=" << format_double(reports.back().tv_obs_pair)
                  << " tv_post=" << format_double(reports.back().tv_post_pair) << '\n';
    }
    write_stability_csv(output_dir(c) / "stability.csv", reports);
    return 0;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config:
        case ErrorKind::Input: return kExitConfig;
        case ErrorKind::MissingInput: return kExitMissing;
        case ErrorKind::EmptyPosterior: return kExitEmpty;
        case ErrorKind::Dominance: return kExitDominance;
        default: return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Consistent Bayesian inversion: push-forward KDE, posterior sampling, and reproduction studies"};
    app.require_subcommand(1);
    CommonFlags flags;
    struct Entry {
        const char* name;
        const char* help;
    };
    const Entry entries[] = {
        {"pushforward", "Sample the prior, evaluate the model, fit the push-forward KDE"},
        {"posterior", "Rejection-sample the posterior from a stored push-forward"},
        {"diagnose", "Integral, KL and dominance diagnostics for a stored push-forward"},
        {"converge", "Chi-squared convergence study of the posterior L1 error"},
        {"compare", "Consistent versus statistical Bayesian posterior on monomial maps"},
        {"stability", "Observed-density perturbation oracle on q = lambda^2"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& e : entries) {
        subs.push_back(app.add_subcommand(e.name, e.help));
        add_common(subs.back(), flags);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        const RunConfig config = resolve_config(flags);
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "pushforward") return cmd_pushforward(config);
        if (cmd == "posterior") return cmd_posterior(config, true);
        if (cmd == "diagnose") return cmd_posterior(config, false);
        if (cmd == "converge") return cmd_converge(config);
        if (cmd == "compare") return cmd_compare(config);
        if (cmd == "stability") return cmd_stability(config);
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
