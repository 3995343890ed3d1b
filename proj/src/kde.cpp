#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "cbayes/density.hpp"

namespace cbayes {

std::string BandwidthRule::name() const {
    switch (kind) {
        case Kind::Silverman: return "silverman";
        case Kind::Scott: return "scott";
        case Kind::LikelihoodCV: return "cv";
        case Kind::Explicit: return "explicit";
    }
    return "unknown";
}

BandwidthRule BandwidthRule::parse(const std::string& name) {
    if (name == "silverman") return silverman();
    if (name == "scott") return scott();
    if (name == "cv") return likelihood_cv();
    fail(ErrorKind::Config, "unknown bandwidth rule '" + name + "' (expected silverman, scott, cv, or a list)");
}

double silverman_factor(std::size_t count, std::size_t dim) {
    const double k = static_cast<double>(dim);
    return std::pow(4.0 / (k + 2.0), 1.0 / (k + 4.0)) * std::pow(static_cast<double>(count), -1.0 / (k + 4.0));
}

double scott_factor(std::size_t count, std::size_t dim) {
    return std::pow(static_cast<double>(count), -1.0 / (static_cast<double>(dim) + 4.0));
}

std::vector<double> sample_stddev(const Matrix& points) {
    require(points.rows() >= 2, ErrorKind::Input, "standard deviation needs at least 2 rows");
    std::vector<double> out(points.cols());
    const double n = static_cast<double>(points.rows());
    for (std::size_t j = 0; j < points.cols(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < points.rows(); ++i) mean += points(i, j);
        mean /= n;
        double ss = 0.0;
        for (std::size_t i = 0; i < points.rows(); ++i) {
            const double d = points(i, j) - mean;
            ss += d * d;
        }
        out[j] = std::sqrt(ss / (n - 1.0));
    }
    return out;
}

GaussianKde::GaussianKde(Matrix points, std::vector<double> bandwidth, std::string rule)
    : bandwidth_(std::move(bandwidth)), rule_(std::move(rule)) {
    require(points.rows() >= 1, ErrorKind::Input, "KDE needs at least one support point");
    require(bandwidth_.size() == points.cols(), ErrorKind::Input, "bandwidth length does not match point dim");
    for (double h : bandwidth_) {
        require(h > 0.0 && std::isfinite(h), ErrorKind::Input, "KDE bandwidths must be positive and finite");
    }
    const std::size_t n = points.rows(), k = points.cols();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        auto ra = points.row(a), rb = points.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    points_ = points.select_rows(order);
    first_ = points_.column(0);
    inv_bandwidth_.resize(k);
    double log_norm = -std::log(static_cast<double>(n)) - 0.5 * static_cast<double>(k) * std::log(2.0 * std::numbers::pi);
    for (std::size_t j = 0; j < k; ++j) {
        inv_bandwidth_[j] = 1.0 / bandwidth_[j];
        log_norm -= std::log(bandwidth_[j]);
    }
    norm_ = std::exp(log_norm);
}

double GaussianKde::kernel_sum(std::span<const double> x, std::size_t skip) const {
    constexpr std::size_t kChunk = 256;
    const double reach = kCutoff * bandwidth_[0];
    const auto lo = std::lower_bound(first_.begin(), first_.end(), x[0] - reach);
    const auto hi = std::upper_bound(lo, first_.end(), x[0] + reach);
    const std::size_t begin = static_cast<std::size_t>(lo - first_.begin());
    const std::size_t end = static_cast<std::size_t>(hi - first_.begin());
    const std::size_t k = points_.cols();
    const double* data = points_.data().data();
    // Squared scaled distances go through a buffer so the exponentials can be
    // evaluated as one vectorized Eigen expression per chunk.
    alignas(16) double buf[kChunk];
    double sum = 0.0;
    for (std::size_t start = begin; start < end; start += kChunk) {
        const std::size_t n = std::min(kChunk, end - start);
        if (k == 1) {
            const double x0 = x[0], inv = inv_bandwidth_[0];
            for (std::size_t t = 0; t < n; ++t) {
                const double z = (x0 - first_[start + t]) * inv;
                buf[t] = z * z;
            }
        } else {
            for (std::size_t t = 0; t < n; ++t) {
                const double* p = data + (start + t) * k;
                double s2 = 0.0;
                for (std::size_t j = 0; j < k; ++j) {
                    const double z = (x[j] - p[j]) * inv_bandwidth_[j];
                    s2 += z * z;
                }
                buf[t] = s2;
            }
        }
        if (skip >= start && skip < start + n) buf[skip - start] = kInf;
        const Eigen::Map<const Eigen::ArrayXd> s2(buf, static_cast<Eigen::Index>(n));
        sum += (-0.5 * s2).exp().sum();
    }
    return sum;
}

double GaussianKde::pdf(std::span<const double> x) const {
    return norm_ * kernel_sum(x);
}

double GaussianKde::loo_log_likelihood() const {
    const std::size_t n = points_.rows();
    require(n >= 2, ErrorKind::Input, "leave-one-out likelihood needs at least 2 points");
    // Leaving one point out rescales the normalization by n / (n - 1).
    const double log_norm = std::log(norm_) + std::log(static_cast<double>(n) / static_cast<double>(n - 1));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = kernel_sum(points_.row(i), i);
        if (s <= 0.0) return -kInf;
        total += std::log(s) + log_norm;
    }
    return total / static_cast<double>(n);
}

void GaussianKde::sample_into(RngStream& rng, std::span<double> out) const {
    const auto i = static_cast<std::size_t>(rng.uniform_index(points_.rows()));
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = points_(i, j) + bandwidth_[j] * rng.standard_normal();
}

Interval GaussianKde::support_range(std::size_t j, double) const {
    double lo = kInf, hi = -kInf;
    for (std::size_t i = 0; i < points_.rows(); ++i) {
        lo = std::min(lo, points_(i, j));
        hi = std::max(hi, points_(i, j));
    }
    return {lo - kCutoff * bandwidth_[j], hi + kCutoff * bandwidth_[j]};
}

nlohmann::json GaussianKde::describe() const {
    return {{"kind", "gaussian_kde"}, {"rule", rule_}, {"bandwidth", bandwidth_}, {"count", points_.rows()},
            {"dim", points_.cols()}};
}

DensityModel make_kde(Matrix points, std::vector<double> bandwidth, std::string rule) {
    return DensityModel(std::make_shared<GaussianKde>(std::move(points), std::move(bandwidth), std::move(rule)));
}

namespace {

std::vector<double> scaled(const std::vector<double>& v, double c) {
    std::vector<double> out(v);
    for (double& x : out) x *= c;
    return out;
}

/// Golden-section search for the LOO-likelihood maximizing multiplier on
/// log2 scale in [-10, 0]. The upper end is Silverman itself, which is
/// already close to the maximal-smoothing bandwidth.
double cv_multiplier(const Matrix& points, const std::vector<double>& base) {
    auto score = [&](double log2c) {
        GaussianKde kde(points, scaled(base, std::exp2(log2c)), "cv");
        return kde.loo_log_likelihood();
    };
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = -10.0, b = 0.0;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = score(c), fd = score(d);
    while (b - a > 0.02) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = score(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = score(d);
        }
    }
    return std::exp2(0.5 * (a + b));
}

}  // namespace

DensityModel fit_gkde(const Matrix& points, const BandwidthRule& rule) {
    const std::size_t n = points.rows(), k = points.cols();
    if (rule.kind == BandwidthRule::Kind::Explicit) {
        require(n >= 1, ErrorKind::Input, "KDE needs at least one support point");
        return make_kde(points, rule.bandwidth, "explicit");
    }
    require(n >= 2, ErrorKind::Input, "KDE bandwidth rules need at least 2 points");
    const std::vector<double> sd = sample_stddev(points);
    for (std::size_t j = 0; j < k; ++j) {
        require(sd[j] > 0.0, ErrorKind::DegenerateData,
                "KDE data has zero spread in dimension " + std::to_string(j));
    }
    switch (rule.kind) {
        case BandwidthRule::Kind::Silverman:
            return make_kde(points, scaled(sd, silverman_factor(n, k)), "silverman");
        case BandwidthRule::Kind::Scott:
            return make_kde(points, scaled(sd, scott_factor(n, k)), "scott");
        case BandwidthRule::Kind::LikelihoodCV: {
            const auto base = scaled(sd, silverman_factor(n, k));
            return make_kde(points, scaled(base, cv_multiplier(points, base)), "cv");
        }
        case BandwidthRule::Kind::Explicit: break;
    }
    fail(ErrorKind::Input, "unhandled bandwidth rule");
}

}  // namespace cbayes
