// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cbayes/experiments.hpp"
#include "cbayes/io.hpp"
#include "oracles.hpp"

using namespace cbayes;

namespace {

constexpr std::size_t kSeeds = 20;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    return buf;
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

int run(int id, double budget_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = budget_s <= 0.0 || secs < budget_s;
    const bool pass = o.pass && in_time;
    std::printf("criterion %2d: %s  %s  [%.1f s", id, pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    if (budget_s > 0.0) std::printf(" / budget %.0f s%s", budget_s, in_time ? "" : ", over budget");
    std::printf("]\n");
    std::fflush(stdout);
    return pass ? 0 : 1;
}

Outcome nonlinear(NonlinearPrior prior, double i_target, double kl_target) {
    std::vector<double> is, kls;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
        const ExperimentReport r = run_nonlinear_system(prior, 10000, s);
        is.push_back(r.diagnostics.integral_estimate);
        kls.push_back(r.diagnostics.kl_divergence);
    }
    const double mi = median(is), mk = median(kls);
    const bool ok_i = within(mi, i_target, 0.05), ok_k = within(mk, kl_target, 0.15);
    return {ok_i && ok_k, "median I " + fmt(mi) + " (target " + fmt(i_target) + " +- 0.05, " +
                              (ok_i ? "ok" : "off") + "), median KL " + fmt(mk) + " (target " + fmt(kl_target) +
                              " +- 0.15, " + (ok_k ? "ok" : "off") + ")"};
}

Outcome piecewise() {
    std::vector<double> is, kls, gaps;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
        const ExperimentReport r = run_piecewise(10000, s);
        is.push_back(r.diagnostics.integral_estimate);
        kls.push_back(r.diagnostics.kl_divergence);
        gaps.push_back(r.extra.at("support_gap"));
    }
    const double mi = median(is), mk = median(kls);
    const double min_gap = *std::min_element(gaps.begin(), gaps.end());
    const bool ok = within(mi, 0.9998, 0.05) && within(mk, 1.6014, 0.15) && min_gap > 0.0;
    return {ok, "median I " + fmt(mi) + ", median KL " + fmt(mk) + ", smallest support gap " + fmt(min_gap)};
}

Outcome dimension_sweep() {
    const ConvergenceResult res = run_chi2_convergence(ConvergenceConfig{});
    std::vector<double> slopes;
    std::string detail = "slopes";
    bool ok = true;
    for (const auto& r : res.records) {
        const double s = r.fitted_slope.value_or(NAN);
        slopes.push_back(s);
        ok = ok && within(s, -0.4, 0.1);
        detail += " d=" + std::to_string(r.dim) + ":" + fmt(s);
    }
    double spread = 0.0;
    for (double a : slopes)
        for (double b : slopes) spread = std::max(spread, std::abs(a - b));
    ok = ok && spread <= 0.05 && slopes.size() == 3;
    return {ok, detail + ", max pairwise difference " + fmt(spread)};
}

Outcome qoi_sweep() {
    ConvergenceConfig cfg;
    cfg.dims = {16};
    cfg.qoi_counts = {1, 2, 4};
    const ConvergenceResult res = run_chi2_convergence(cfg);
    std::string detail = "d=16 slopes";
    bool ok = res.records.size() == 3;
    for (const auto& r : res.records) {
        const double s = r.fitted_slope.value_or(NAN);
        const double target = -2.0 / (static_cast<double>(r.qoi_count) + 4.0);
        ok = ok && within(s, target, 0.1);
        detail += " m=" + std::to_string(r.qoi_count) + ":" + fmt(s) + " (target " + fmt(target) + ")";
    }
    return {ok, detail};
}

Outcome mass_oracle() {
    const double mass = run_mass_oracle();
    return {within(mass, 1.0, 1e-3), "posterior mass " + fmt(mass, 8)};
}

Outcome stability() {
    bool ok = true;
    std::string detail;
    for (double delta : {0.01, 0.05, 0.1}) {
        const StabilityReport r = run_stability_oracle(delta);
        const double gap = std::abs(r.tv_post_pair - r.tv_obs_pair);
        ok = ok && gap < 1e-3;
        detail += "delta=" + fmt(delta) + ": |diff| " + fmt(gap, 3) + "  ";
    }
    return {ok, detail};
}

Outcome error_bound() {
    std::size_t violations = 0;
    double worst = -kInf;
    for (std::uint64_t s = 1; s <= kSeeds; ++s) {
        const ErrorBoundRecord r = run_error_bound(s);
        const double slack = r.tv_posterior - r.bound();
        worst = std::max(worst, slack);
        if (slack > 1e-3) ++violations;
    }
    return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(kSeeds) +
                                 " seeds, largest tv_post - C*tv_pf = " + fmt(worst)};
}

Outcome comparison() {
    const ComparisonReport p1 = run_comparison(1, 100000, 1);
    const ComparisonReport p5 = run_comparison(5, 100000, 1);
    const bool ok = p1.tv_between_posteriors < 0.05 && p5.tv_consistent < 0.1 && p5.tv_statistical > 0.1;
    return {ok, "p=1 posterior TV " + fmt(p1.tv_between_posteriors) + "; p=5 tv_consistent " + fmt(p5.tv_consistent) +
                    ", tv_statistical " + fmt(p5.tv_statistical)};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome properties() {
    const ParameterDomain unit = ParameterDomain::cube(1, -1.0, 1.0);
    const DensityModel prior = uniform_box(unit);
    std::string detail;
    bool ok = true;

    // Prior recovery: observed identical to the push-forward.
    {
        RngStream rng(101);
        const auto pf = build_pushforward(nonlinear_system(), uniform_box(nonlinear_system_domain()), 10000, rng);
        const PosteriorHandle h(uniform_box(nonlinear_system_domain()), pf.pushforward, pf.pushforward,
                                nonlinear_system());
        bool exact = true;
        for (std::size_t i = 0; i < pf.batch.count(); ++i) {
            const auto lam = pf.batch.params().row(i);
            exact = exact && h.posterior_pdf(lam, pf.batch.qois().row(i)) == h.prior().pdf(lam);
        }
        const Diagnostics d = diagnostics(h, pf.batch);
        exact = exact && d.integral_estimate == 1.0 && d.kl_divergence == 0.0;
        ok = ok && exact;
        detail += std::string("prior recovery ") + (exact ? "exact" : "NOT exact");
    }

    // Rejection sampler against the quadrature posterior, and acceptance rate.
    {
        const RngStream root(2024);
        RngStream prior_rng = root.split(0), reject_rng = root.split(1);
        const auto pf = build_pushforward(monomial(1), prior, 100000, prior_rng);
        const PosteriorHandle h(prior, truncated_normal(0.25, 0.1, -1.0, 1.0), pf.pushforward, monomial(1));
        const RejectionResult res = rejection_sample(h, pf.batch, reject_rng);
        const auto cdf = oracle::normalized_cdf([&](double x) { return h.posterior_pdf(std::vector<double>{x}); },
                                                -1.0, 1.0, 8001);
        const double ks = oracle::ks_statistic(res.accepted.params().column(0),
                                               [&](double x) { return oracle::interp(cdf, -1.0, 1.0, x); });
        const Diagnostics& d = res.diagnostics;
        const double expected = d.integral_estimate / d.max_ratio;
        const double se = std::sqrt(expected * (1.0 - expected) / static_cast<double>(d.sample_count));
        const double z = (d.acceptance_rate - expected) / se;
        ok = ok && ks < 0.02 && std::abs(z) < 3.0;
        detail += "; KS " + fmt(ks) + "; acceptance " + fmt(d.acceptance_rate) + " vs I/max " + fmt(expected) +
                  " (" + fmt(z, 2) + " SE)";
    }

    // Determinism: two independent runs write byte-identical files.
    {
        const auto dir = std::filesystem::temp_directory_path() / "cbayes_acceptance";
        std::filesystem::create_directories(dir);
        std::vector<std::string> blobs;
        for (int k = 0; k < 2; ++k) {
            const PipelineOutput out = run_pipeline("det", nonlinear_system(), uniform_box(nonlinear_system_domain()),
                                                    nonlinear_observed(), 5000, 77);
            const auto csv = dir / ("accepted_" + std::to_string(k) + ".csv");
            const auto js = dir / ("report_" + std::to_string(k) + ".json");
            write_batch_csv(csv, out.accepted);
            nlohmann::json j = out.report.to_json();
            j.erase("wall_ms");
            write_json(js, j);
            blobs.push_back(slurp(csv) + slurp(js));
        }
        const bool same = blobs[0] == blobs[1] && !blobs[0].empty();
        ok = ok && same;
        detail += std::string("; reruns ") + (same ? "byte-identical" : "DIFFER");
        std::filesystem::remove_all(dir);
    }
    return {ok, detail};
}

}  // namespace

int main() {
    int failures = 0;
    failures += run(1, 30, [] { return nonlinear(NonlinearPrior::Uniform, 0.9993, 1.1344); });
    failures += run(2, 30, [] { return nonlinear(NonlinearPrior::Beta25, 1.0106, 0.4399); });
    failures += run(3, 30, piecewise);
    failures += run(4, 300, dimension_sweep);
    failures += run(5, 300, qoi_sweep);
    failures += run(6, 10, mass_oracle);
    failures += run(7, 10, stability);
    failures += run(8, 60, error_bound);
    failures += run(9, 120, comparison);
    failures += run(10, 0, properties);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
