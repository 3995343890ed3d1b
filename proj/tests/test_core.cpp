#include <cmath>
#include <random>

#include "cbayes/core.hpp"
#include "cbayes/models.hpp"
#include "doctest.h"

using namespace cbayes;

TEST_CASE("rng stream matches the standard engine seeded through splitmix64") {
    std::mt19937_64 reference(splitmix64(42));
    RngStream rng(42);
    for (int i = 0; i < 100; ++i) CHECK(rng.next_u64() == reference());
}

TEST_CASE("splitmix64 reference values") {
    // First outputs of the published splitmix64 generator seeded with 0:
    // each call advances the state by the golden-ratio increment first.
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("rng streams are reproducible and split streams differ") {
    RngStream a(7), b(7);
    for (int i = 0; i < 10; ++i) CHECK(a.uniform() == b.uniform());
    RngStream c = RngStream(7).split(0), d = RngStream(7).split(1);
    CHECK(c.next_u64() != d.next_u64());
    RngStream e = RngStream(7).split(1);
    RngStream f = RngStream(7).split(1);
    CHECK(e.next_u64() == f.next_u64());
}

TEST_CASE("uniform draws lie in [0, 1) and open draws exclude zero") {
    RngStream rng(3);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK((u >= 0.0 && u < 1.0));
        CHECK(rng.uniform_open() > 0.0);
    }
}

TEST_CASE("parameter domain validation and containment") {
    CHECK_THROWS_AS(ParameterDomain(std::vector<Interval>{}), Error);
    CHECK_THROWS_AS(ParameterDomain({{1.0, 1.0}}), Error);
    const auto box = ParameterDomain::cube(2, 0.0, 1.0);
    CHECK(box.contains(std::vector<double>{0.5, 1.0}));
    CHECK_FALSE(box.contains(std::vector<double>{0.5, 1.01}));
    CHECK(box.volume() == doctest::Approx(1.0));
    const auto half = ParameterDomain({{0.0, kInf}});
    CHECK(half.contains(std::vector<double>{1e300}));
    CHECK_FALSE(half.bounded());
    try {
        (void)box.contains(std::vector<double>{0.5});
        FAIL("expected an input error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Input);
    }
}

TEST_CASE("evaluate_batch examples") {
    SUBCASE("identity monomial") {
        const Matrix out = evaluate_batch(monomial(1), Matrix::from_rows({{0.5}}));
        CHECK(out(0, 0) == 0.5);
    }
    SUBCASE("nonlinear system against Cramer's rule") {
        const double l1 = 0.79, l2 = 1.0 - 4.5 * std::sqrt(0.1);
        // [l1 1; 1 -l2] [x1^2; x2^2] = [1; 1]
        const double det = l1 * (-l2) - 1.0 * 1.0;
        const double x2sq = (l1 * 1.0 - 1.0 * 1.0) / det;
        const Matrix out = evaluate_batch(nonlinear_system(), Matrix::from_rows({{l1, l2}}));
        CHECK(out(0, 0) == doctest::Approx(std::sqrt(x2sq)).epsilon(1e-14));
        CHECK(out(0, 0) == doctest::Approx(0.56162).epsilon(1e-5));
    }
    SUBCASE("quadratic model at the mean") {
        const auto qm = quadratic_chi2({2, 1, std::nullopt, {}});
        CHECK(evaluate_batch(qm.model, Matrix(1, 2))(0, 0) == 0.0);
    }
}

TEST_CASE("evaluate_batch is identical for any worker count") {
    RngStream rng(11);
    const Matrix params = sample_uniform(nonlinear_system_domain(), 5003, rng);
    const Matrix one = evaluate_batch(nonlinear_system(), params, 1);
    for (std::size_t w : {2u, 3u, 8u}) CHECK(evaluate_batch(nonlinear_system(), params, w) == one);
}

TEST_CASE("evaluate_batch errors") {
    CHECK_THROWS_AS(evaluate_batch(monomial(1), Matrix(3, 2)), Error);

    const ForwardModel picky("picky", 1, 1, [](std::span<const double> x, std::span<double> out) {
        if (x[0] < 0.0) throw Error(ErrorKind::Domain, "negative input");
        out[0] = std::sqrt(x[0]);
    });
    const Matrix params = Matrix::from_rows({{1.0}, {-1.0}, {4.0}, {-2.0}});
    try {
        (void)evaluate_batch(picky, params, 2);
        FAIL("expected a batch evaluation error");
    } catch (const BatchEvaluationError& e) {
        REQUIRE(e.failures().size() == 2);
        CHECK(e.failures()[0].row == 1);
        CHECK(e.failures()[1].row == 3);
    }

    const ForwardModel nan_model("nan", 1, 1, [](std::span<const double>, std::span<double> out) { out[0] = NAN; });
    CHECK_THROWS_AS(evaluate_batch(nan_model, Matrix(2, 1)), BatchEvaluationError);
}

TEST_CASE("sample_uniform") {
    const auto box = ParameterDomain::cube(2, 0.0, 1.0);
    RngStream r1(5), r2(5);
    const Matrix a = sample_uniform(box, 3, r1);
    CHECK(a.rows() == 3);
    for (double v : a.data()) CHECK((v >= 0.0 && v <= 1.0));
    CHECK(a == sample_uniform(box, 3, r2));

    RngStream r3(9);
    const Matrix big = sample_uniform(ParameterDomain::cube(1, 0.0, 1.0), 100000, r3);
    double mean = 0.0;
    for (double v : big.data()) mean += v;
    mean /= 1e5;
    CHECK(std::abs(mean - 0.5) < 0.01);

    RngStream r4(1);
    CHECK_THROWS_AS(sample_uniform(ParameterDomain::unbounded(2), 3, r4), Error);
}

TEST_CASE("sample batch invariants") {
    CHECK_THROWS_AS(SampleBatch(Matrix(3, 1), Matrix(2, 1), 0, "m"), Error);
    SampleBatch b(Matrix::from_rows({{0.1}, {0.9}, {2.0}}), Matrix::from_rows({{1}, {2}, {3}}), 4, "m");
    CHECK(b.count() == 3);
    CHECK_THROWS_AS(b.check_inside(ParameterDomain::cube(1, 0.0, 1.0)), Error);
    const std::vector<std::size_t> keep{0, 2};
    const SampleBatch s = b.select(keep);
    CHECK(s.count() == 2);
    CHECK(s.qois()(1, 0) == 3.0);
    CHECK(s.seed() == 4);
    CHECK(b.head(1).params()(0, 0) == 0.1);
}
