#include <algorithm>
#include <cmath>
#include <numbers>

#include "cbayes/density.hpp"
#include "cbayes/special.hpp"
#include "doctest.h"

using namespace cbayes;

namespace {

// Midpoint rule; independent of the library's trapezoid helpers.
template <class F>
double midpoint(F f, double a, double b, std::size_t n) {
    const double h = (b - a) / static_cast<double>(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += f(a + (static_cast<double>(i) + 0.5) * h);
    return s * h;
}

std::vector<double> column_moments(const Matrix& m, std::size_t j) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) mean += m(i, j);
    mean /= static_cast<double>(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) sq += (m(i, j) - mean) * (m(i, j) - mean);
    return {mean, sq / static_cast<double>(m.rows() - 1)};
}

}  // namespace

TEST_CASE("pdf examples") {
    CHECK(chi_squared(2).pdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(uniform_box(ParameterDomain::cube(2, 0.0, 1.0)).pdf(std::vector<double>{0.5, 0.5}) == 1.0);
    const DensityModel single = make_kde(Matrix::from_rows({{0.0}}), {1.0});
    CHECK(single.pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-14));
    CHECK_THROWS_AS(single.pdf(std::vector<double>{0.0, 1.0}), Error);
}

TEST_CASE("densities vanish outside their support") {
    CHECK(uniform_interval(1.0, 2.0).pdf(2.5) == 0.0);
    CHECK(chi_squared(3).pdf(-0.1) == 0.0);
    CHECK(truncated_normal(0.0, 1.0, -1.0, 1.0).pdf(1.5) == 0.0);
    CHECK(beta(2, 5, ParameterDomain::cube(1, 0.79, 0.99)).pdf(0.7) == 0.0);
}

TEST_CASE("densities integrate to one") {
    const auto integral = [](const DensityModel& d, double a, double b) {
        return midpoint([&](double x) { return d.pdf(x); }, a, b, 200000);
    };
    CHECK(integral(chi_squared(4), 0.0, 80.0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(integral(normal(0.3, 0.025), 0.0, 0.6) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(integral(beta(2, 5, ParameterDomain::cube(1, 0.79, 0.99)), 0.79, 0.99) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(integral(truncated_normal(0.25, 0.1, -1.0, 1.0, true), -1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
    // Unnormalized clipping keeps the untruncated pdf values.
    CHECK(truncated_normal(0.9, 0.1, -1.0, 1.0).pdf(0.9) == doctest::Approx(normal_pdf(0.0, 0.0, 0.1)));
}

TEST_CASE("chi-squared cdf and quantile") {
    CHECK(chi2_cdf(2, 0.0) == 0.0);
    CHECK(chi2_cdf(2, 2.0 * std::log(5.0)) == doctest::Approx(0.8).epsilon(1e-13));
    const double oracle = midpoint([](double q) { return q * std::exp(-q / 2.0) / 4.0; }, 0.0, 10.0, 200000);
    CHECK(std::abs(chi2_cdf(4, 10.0) - oracle) < 1e-8);
    CHECK(chi2_quantile(2, 0.4) == doctest::Approx(2.0 * std::log(5.0 / 3.0)).epsilon(1e-8));
    CHECK(chi2_quantile(2, 0.6) == doctest::Approx(2.0 * std::log(2.5)).epsilon(1e-8));
    for (double d : {1.0, 3.0, 50.0}) {
        for (double p : {0.01, 0.4, 0.6, 0.99}) CHECK(std::abs(chi2_cdf(d, chi2_quantile(d, p)) - p) < 1e-9);
    }
    CHECK_THROWS_AS(chi2_cdf(2, -1.0), Error);
    CHECK_THROWS_AS(chi2_quantile(2, 0.0), Error);
    CHECK_THROWS_AS(chi2_quantile(2, 1.0), Error);
}

TEST_CASE("log gamma and normal helpers") {
    CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-13));
    CHECK(log_gamma(0.5) == doctest::Approx(0.5 * std::log(std::numbers::pi)).epsilon(1e-13));
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_quantile(normal_cdf(1.3)) == doctest::Approx(1.3).epsilon(1e-9));
}

TEST_CASE("sampling moments") {
    RngStream rng(2024);
    const Matrix b = beta(2, 5, ParameterDomain::cube(1, 0.79, 0.99)).sample(10000, rng);
    CHECK(std::abs(column_moments(b, 0)[0] - (0.79 + 0.2 * 2.0 / 7.0)) < 0.002);

    const Matrix z = standard_normal(100).sample(10000, rng);
    for (std::size_t j = 0; j < 100; ++j) CHECK(std::abs(column_moments(z, j)[1] - 1.0) < 0.05);

    const Matrix c = chi_squared(3).sample(20000, rng);
    CHECK(std::abs(column_moments(c, 0)[0] - 3.0) < 0.1);

    RngStream r1(8), r2(8);
    CHECK(uniform_interval(0, 1).sample(1, r1) == uniform_interval(0, 1).sample(1, r2));
}

TEST_CASE("multivariate normal uses the full covariance") {
    const Matrix cov = Matrix::from_rows({{2.0, 0.6}, {0.6, 1.0}});
    const DensityModel mvn = multivariate_normal({1.0, -1.0}, cov);
    const double det = 2.0 - 0.36;
    // x - mu = (1, 1); quadratic form with the explicit inverse.
    const double quad = (1.0 * 1.0 - 2 * 0.6 + 2.0 * 1.0) / det;
    CHECK(mvn.pdf(std::vector<double>{2.0, 0.0}) ==
          doctest::Approx(std::exp(-0.5 * quad) / (2.0 * std::numbers::pi * std::sqrt(det))).epsilon(1e-13));
    RngStream rng(4);
    const Matrix s = mvn.sample(40000, rng);
    double cross = 0.0;
    for (std::size_t i = 0; i < s.rows(); ++i) cross += (s(i, 0) - 1.0) * (s(i, 1) + 1.0);
    CHECK(std::abs(cross / 40000.0 - 0.6) < 0.05);
    CHECK_THROWS_AS(multivariate_normal({0.0, 0.0}, Matrix::from_rows({{1.0, 2.0}, {2.0, 1.0}})), Error);
}

TEST_CASE("product densities multiply") {
    const DensityModel p = product({uniform_interval(0, 2), chi_squared(2)});
    CHECK(p.dim() == 2);
    CHECK(p.pdf(std::vector<double>{1.0, 1.0}) == doctest::Approx(0.5 * 0.5 * std::exp(-0.5)));
}

TEST_CASE("KDE bandwidth rules and values") {
    CHECK(silverman_factor(100000, 1) == doctest::Approx(std::pow(4.0 / 3.0, 0.2) * std::pow(1e5, -0.2)));
    CHECK(std::pow(4.0 / 3.0, 0.2) * 0.1 == doctest::Approx(0.10593).epsilon(1e-4));
    CHECK(scott_factor(1000, 2) == doctest::Approx(std::pow(1000.0, -1.0 / 6.0)));

    const DensityModel two = make_kde(Matrix::from_rows({{-1.0}, {1.0}}), {1.0});
    CHECK(two.pdf(0.0) == doctest::Approx(std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-14));

    RngStream rng(77);
    const Matrix z = standard_normal(1).sample(100000, rng);
    const DensityModel kde = fit_gkde(z);
    const double s = sample_stddev(z)[0];
    CHECK(kde.as_kde()->bandwidth()[0] == doctest::Approx(s * silverman_factor(100000, 1)));
    double sup = 0.0;
    for (int i = 0; i <= 600; ++i) {
        const double x = -3.0 + 0.01 * i;
        sup = std::max(sup, std::abs(kde.pdf(x) - normal_pdf(x)));
    }
    CHECK(sup < 0.02);
}

TEST_CASE("KDE equals the brute-force kernel sum") {
    RngStream rng(5);
    const Matrix pts = standard_normal(3).sample(500, rng);
    const DensityModel kde = fit_gkde(pts);
    const auto& h = kde.as_kde()->bandwidth();
    for (int t = 0; t < 20; ++t) {
        std::vector<double> x{rng.normal(0, 1.5), rng.normal(0, 1.5), rng.normal(0, 1.5)};
        double sum = 0.0;
        for (std::size_t i = 0; i < pts.rows(); ++i) {
            double k = 1.0;
            for (std::size_t j = 0; j < 3; ++j) k *= normal_pdf(x[j], pts(i, j), h[j]);
            sum += k;
        }
        CHECK(kde.pdf(x) == doctest::Approx(sum / 500.0).epsilon(1e-12));
    }
}

TEST_CASE("KDE is independent of point order") {
    const DensityModel a = make_kde(Matrix::from_rows({{0.1}, {0.7}, {-0.4}}), {0.3});
    const DensityModel b = make_kde(Matrix::from_rows({{-0.4}, {0.1}, {0.7}}), {0.3});
    for (double x : {-1.0, 0.0, 0.33, 2.0}) CHECK(a.pdf(x) == b.pdf(x));
}

TEST_CASE("KDE errors") {
    CHECK_THROWS_AS(fit_gkde(Matrix::from_rows({{1.0}})), Error);
    try {
        (void)fit_gkde(Matrix::from_rows({{1.0, 2.0}, {1.0, 3.0}}));
        FAIL("expected degenerate data");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateData);
    }
    CHECK_THROWS_AS(make_kde(Matrix::from_rows({{1.0}, {2.0}}), {-1.0}), Error);
}

TEST_CASE("cross-validated bandwidth is finite and positive") {
    RngStream rng(6);
    const Matrix z = standard_normal(1).sample(2000, rng);
    const DensityModel cv = fit_gkde(z, BandwidthRule::likelihood_cv());
    const double h = cv.as_kde()->bandwidth()[0];
    CHECK(h > 0.0);
    CHECK(std::isfinite(h));
    CHECK(BandwidthRule::parse("cv").kind == BandwidthRule::Kind::LikelihoodCV);
    CHECK_THROWS_AS(BandwidthRule::parse("nope"), Error);
}
