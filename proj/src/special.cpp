#include "cbayes/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "cbayes/error.hpp"

namespace cbayes {

namespace {

constexpr int kMaxIterations = 100000;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double term = sum;
    for (int n = 0; n < kMaxIterations; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

double gamma_q_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

}  // namespace

double log_gamma(double x) {
    require(x > 0.0, ErrorKind::Input, "log_gamma requires x > 0");
    static constexpr std::array<double, 9> kCoeff = {
        0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,   12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (x < 0.5) {
        // Reflection keeps accuracy near the pole.
        return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
    }
    const double z = x - 1.0;
    double sum = kCoeff[0];
    for (std::size_t i = 1; i < kCoeff.size(); ++i) sum += kCoeff[i] / (z + static_cast<double>(i));
    const double t = z + 7.5;
    return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(sum);
}

double regularized_gamma_p(double a, double x) {
    require(a > 0.0, ErrorKind::Input, "incomplete gamma requires a > 0");
    require(x >= 0.0, ErrorKind::Input, "incomplete gamma requires x >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
    require(a > 0.0, ErrorKind::Input, "incomplete gamma requires a > 0");
    require(x >= 0.0, ErrorKind::Input, "incomplete gamma requires x >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_fraction(a, x);
}

double chi2_log_pdf(double dof, double q) {
    require(dof > 0.0, ErrorKind::Input, "chi-squared needs dof > 0");
    if (q < 0.0) return -std::numeric_limits<double>::infinity();
    const double k = 0.5 * dof;
    if (q == 0.0) {
        if (dof < 2.0) return std::numeric_limits<double>::infinity();
        if (dof > 2.0) return -std::numeric_limits<double>::infinity();
        return std::log(0.5);
    }
    return (k - 1.0) * std::log(q) - 0.5 * q - k * std::numbers::ln2 - log_gamma(k);
}

double chi2_pdf(double dof, double q) {
    return std::exp(chi2_log_pdf(dof, q));
}

double chi2_cdf(double dof, double q) {
    require(dof > 0.0, ErrorKind::Input, "chi-squared needs dof > 0");
    require(q >= 0.0, ErrorKind::Input, "chi2_cdf requires q >= 0");
    return regularized_gamma_p(0.5 * dof, 0.5 * q);
}

double chi2_quantile(double dof, double p) {
    require(dof > 0.0, ErrorKind::Input, "chi-squared needs dof > 0");
    require(p > 0.0 && p < 1.0, ErrorKind::Input, "chi2_quantile requires 0 < p < 1");
    double lo = 0.0;
    double hi = std::max(1.0, dof);
    while (chi2_cdf(dof, hi) < p) {
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 2000; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (chi2_cdf(dof, mid) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double flo = std::abs(chi2_cdf(dof, lo) - p);
    const double fhi = std::abs(chi2_cdf(dof, hi) - p);
    return flo < fhi ? lo : hi;
}

double normal_pdf(double x, double mean, double stddev) {
    const double z = (x - mean) / stddev;
    return std::exp(-0.5 * z * z) / (stddev * std::sqrt(2.0 * std::numbers::pi));
}

double normal_cdf(double x, double mean, double stddev) {
    return 0.5 * std::erfc(-(x - mean) / (stddev * std::numbers::sqrt2));
}

double normal_quantile(double p) {
    require(p > 0.0 && p < 1.0, ErrorKind::Input, "normal_quantile requires 0 < p < 1");
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (normal_cdf(mid) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double beta_log_norm(double alpha, double beta) {
    return log_gamma(alpha) + log_gamma(beta) - log_gamma(alpha + beta);
}

double trapezoid(const std::function<double(double)>& f, double a, double b, std::size_t nodes) {
    require(nodes >= 2, ErrorKind::Input, "trapezoid rule needs at least 2 nodes");
    require(b >= a, ErrorKind::Input, "trapezoid rule needs a <= b");
    if (b == a) return 0.0;
    const double h = (b - a) / static_cast<double>(nodes - 1);
    double sum = 0.5 * (f(a) + f(b));
    for (std::size_t i = 1; i + 1 < nodes; ++i) sum += f(a + h * static_cast<double>(i));
    return sum * h;
}

double trapezoid_pieces(const std::function<double(double)>& f, double a, double b, std::vector<double> breakpoints,
                        std::size_t nodes) {
    require(b > a, ErrorKind::Input, "piecewise trapezoid rule needs a < b");
    std::erase_if(breakpoints, [&](double x) { return !(x > a && x < b); });
    breakpoints.push_back(a);
    breakpoints.push_back(b);
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
    // Nodes are shared out in proportion to piece length. Piece ends are
    // nudged one ulp inward so each piece sees the one-sided limit of f at a
    // jump.
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const double lo = breakpoints[i], hi = breakpoints[i + 1];
        const double lo_in = std::nextafter(lo, hi), hi_in = std::nextafter(hi, lo);
        const auto share = static_cast<std::size_t>(std::ceil(static_cast<double>(nodes) * (hi - lo) / (b - a)));
        total += trapezoid(
            [&](double x) {
                if (x == lo) return f(lo_in);
                if (x == hi) return f(hi_in);
                return f(x);
            },
            lo, hi, std::max<std::size_t>(share, 65));
    }
    return total;
}

}  // namespace cbayes
