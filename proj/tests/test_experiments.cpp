#include <cmath>
#include <numbers>

#include "cbayes/experiments.hpp"
#include "doctest.h"

using namespace cbayes;

namespace {

void check_finite(const nlohmann::json& j) {
    if (j.is_number()) {
        CHECK(std::isfinite(j.get<double>()));
    } else if (j.is_structured()) {
        for (const auto& v : j) check_finite(v);
    }
}

nlohmann::json without_timing(nlohmann::json j) {
    j.erase("wall_ms");
    return j;
}

}  // namespace

TEST_CASE("nonlinear system at small sample size") {
    const ExperimentReport r = run_nonlinear_system(NonlinearPrior::Uniform, 100, 3);
    CHECK(r.diagnostics.sample_count == 100);
    CHECK(r.accepted_count > 0);
    check_finite(r.to_json());
    CHECK_THROWS_AS(run_nonlinear_system(NonlinearPrior::Uniform, 99, 3), Error);
    CHECK(parse_nonlinear_prior("beta25") == NonlinearPrior::Beta25);
    CHECK_THROWS_AS(parse_nonlinear_prior("gamma"), Error);
}

TEST_CASE("reports are reproducible from their seed") {
    const ExperimentReport a = run_nonlinear_system(NonlinearPrior::Beta25, 2000, 17);
    const ExperimentReport b = run_nonlinear_system(NonlinearPrior::Beta25, 2000, 17);
    CHECK(without_timing(a.to_json()) == without_timing(b.to_json()));
    const ExperimentReport c = run_nonlinear_system(NonlinearPrior::Beta25, 2000, 18);
    CHECK(c.diagnostics.integral_estimate != a.diagnostics.integral_estimate);
}

TEST_CASE("posterior push-forward improves on the prior push-forward") {
    const ExperimentReport r = run_nonlinear_system(NonlinearPrior::Uniform, 10000, 4);
    REQUIRE(r.tv_pushforward_prior_vs_observed);
    REQUIRE(r.tv_pushforward_posterior_vs_observed);
    CHECK(*r.tv_pushforward_prior_vs_observed > 0.2);
    CHECK(*r.tv_pushforward_posterior_vs_observed < *r.tv_pushforward_prior_vs_observed);
    CHECK(*r.tv_pushforward_posterior_vs_observed < 0.1);
}

TEST_CASE("piecewise run detects incompatible observations") {
    const ExperimentReport r = run_piecewise(10000, 5, piecewise_options(), 10.0);
    CHECK(r.diagnostics.total_violations() > 0);
    CHECK(std::abs(r.diagnostics.integral_estimate - 1.0) > 0.5);
}

TEST_CASE("support gap scan") {
    CHECK(support_gap(uniform_interval(0, 1), 0.0, 1.0) == 0.0);
    const double h = 0.1;
    const DensityModel bimodal = make_kde(Matrix::from_rows({{0.0}, {10.0}}), {h});
    // Each half-kernel 0.5 * phi(x / h) / h drops below 1e-6 at this distance.
    const double reach = h * std::sqrt(2.0 * std::log(0.5 / (h * std::sqrt(2.0 * std::numbers::pi)) / 1e-6));
    CHECK(std::abs(support_gap(bimodal, 0.0, 10.0) - (10.0 - 2.0 * reach)) < 0.01);
}

TEST_CASE("convergence study guards") {
    ConvergenceConfig cfg;
    cfg.dims = {2};
    cfg.sample_sizes = {200};
    cfg.reps = 1;
    cfg.eval_count = 500;
    const ConvergenceResult res = run_chi2_convergence(cfg);
    REQUIRE(res.records.size() == 1);
    CHECK_FALSE(res.records[0].fitted_slope);
    CHECK(res.rows.size() == 1);
    CHECK(res.rows[0].l1_error > 0.0);
    ConvergenceRecord copy = res.records[0];
    CHECK_THROWS_AS(fit_rate(copy), Error);

    const ConvergenceResult syn = synthetic_power_law({100, 316, 1000, 3162, 10000}, -0.4, 2.0);
    REQUIRE(syn.records[0].fitted_slope);
    CHECK(std::abs(*syn.records[0].fitted_slope + 0.4) < 1e-10);
}

TEST_CASE("small convergence study is deterministic across worker counts") {
    ConvergenceConfig cfg;
    cfg.dims = {2};
    cfg.sample_sizes = {100, 300, 1000};
    cfg.reps = 3;
    cfg.eval_count = 1000;
    const ConvergenceResult a = run_chi2_convergence(cfg);
    cfg.workers = 3;
    const ConvergenceResult b = run_chi2_convergence(cfg);
    CHECK(a.records[0].errors == b.records[0].errors);
    REQUIRE(a.records[0].fitted_slope);
    CHECK(*a.records[0].fitted_slope < 0.0);
}

TEST_CASE("comparison guards") {
    CHECK_THROWS_AS(run_comparison(2, 1000, 1), Error);
    const ComparisonReport r = run_comparison(1, 5000, 2);
    CHECK(r.tv_consistent < 0.2);
    CHECK(r.consistent_accepted > 0);
    check_finite(r.to_json());
}

TEST_CASE("stability oracle") {
    const StabilityReport zero = run_stability_oracle(0.0);
    CHECK(zero.tv_obs_pair == 0.0);
    CHECK(zero.tv_post_pair < 1e-12);
    const StabilityReport r = run_stability_oracle(0.05);
    CHECK(std::abs(r.tv_post_pair - r.tv_obs_pair) < 1e-3);
    CHECK(r.tv_obs_pair > 0.0);
    // Node doubling leaves the answer unchanged to well under the tolerance.
    CHECK(std::abs(run_stability_oracle(0.05, 40001).tv_post_pair - r.tv_post_pair) < 1e-6);
    try {
        (void)run_stability_oracle(-5.0);
        FAIL("expected a dominance error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Dominance);
    }
}

TEST_CASE("mass oracle at coarse resolution") {
    CHECK(std::abs(run_mass_oracle(400) - 1.0) < 1e-2);
}
