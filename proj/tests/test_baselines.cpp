#include <cmath>
#include <numbers>

#include "cbayes/baselines.hpp"
#include "cbayes/inference.hpp"
#include "cbayes/models.hpp"
#include "doctest.h"

using namespace cbayes;

TEST_CASE("gaussian likelihood values") {
    const LikelihoodSpec spec{{0.25}, {0.1}};
    const ForwardModel id = monomial(1);
    const double peak = 1.0 / (0.1 * std::sqrt(2.0 * std::numbers::pi));
    CHECK(likelihood(spec, id, std::vector<double>{0.25}) == doctest::Approx(peak).epsilon(1e-14));
    CHECK(peak == doctest::Approx(3.98942).epsilon(1e-6));
    CHECK(likelihood(spec, id, std::vector<double>{0.35}) == doctest::Approx(peak * std::exp(-0.5)).epsilon(1e-13));

    const LikelihoodSpec two{{1.0, 2.0}, {0.5, 2.0}};
    CHECK(likelihood_at(two, std::vector<double>{1.0, 2.0}) ==
          doctest::Approx(1.0 / (2.0 * std::numbers::pi * 0.5 * 2.0)).epsilon(1e-14));

    CHECK_THROWS_AS((LikelihoodSpec{{0.0}, {0.0}}.validate()), Error);
    CHECK_THROWS_AS((LikelihoodSpec{{0.0, 1.0}, {1.0}}.validate()), Error);
}

TEST_CASE("statistical posterior rejection") {
    RngStream rng(31);
    const ParameterDomain unit = ParameterDomain::cube(1, -1, 1);
    const auto pf = build_pushforward(monomial(1), uniform_box(unit), 20000, rng);

    SUBCASE("flat likelihood accepts everything") {
        const LikelihoodSpec flat{{0.0}, {1e6}};
        CHECK(statistical_posterior_rejection(flat, pf.batch, rng).count() == 20000);
    }
    SUBCASE("posterior mean near the datum") {
        const LikelihoodSpec spec{{0.25}, {0.1}};
        const SampleBatch acc = statistical_posterior_rejection(spec, pf.batch, rng);
        double mean = 0.0;
        for (double v : acc.params().data()) mean += v;
        mean /= static_cast<double>(acc.count());
        CHECK(std::abs(mean - 0.25) < 0.01);
    }
    SUBCASE("zero likelihood everywhere") {
        const LikelihoodSpec far{{1e4}, {0.01}};
        try {
            (void)statistical_posterior_rejection(far, pf.batch, rng);
            FAIL("expected an empty posterior");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::EmptyPosterior);
        }
    }
}

TEST_CASE("unnormalized statistical posterior is proportional to prior times likelihood") {
    // Both sides are built independently: the prior pdf times a hand-written
    // Gaussian kernel against prior pdf times the library likelihood.
    const LikelihoodSpec spec{{0.25}, {0.1}};
    const DensityModel prior = uniform_box(ParameterDomain::cube(1, -1, 1));
    const ForwardModel m = monomial(5);
    RngStream rng(32);
    double ref = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double lam = rng.uniform(-1, 1);
        const double q = std::pow(lam, 5);
        const double hand = 0.5 * std::exp(-0.5 * (q - 0.25) * (q - 0.25) / 0.01);
        const double lib = prior.pdf(lam) * likelihood(spec, m, std::vector<double>{lam});
        const double ratio = lib / hand;
        if (i == 0) ref = ratio;
        CHECK(std::abs(ratio / ref - 1.0) < 1e-12);
    }
}

TEST_CASE("push-forward comparison self-test") {
    RngStream rng(33);
    const ParameterDomain unit = ParameterDomain::cube(1, -1, 1);
    const auto pf = build_pushforward(monomial(1), uniform_box(unit), 5000, rng);
    const PushforwardComparison c = pushforward_compare(pf.batch, pf.batch, pf.pushforward);
    CHECK(c.tv_consistent < 1e-9);
    CHECK(c.tv_statistical == c.tv_consistent);
}
