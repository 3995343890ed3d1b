#include "cbayes/density.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "cbayes/special.hpp"

namespace cbayes {

const char* to_string(DensityKind kind) noexcept {
    switch (kind) {
        case DensityKind::Uniform: return "uniform";
        case DensityKind::Normal: return "normal";
        case DensityKind::TruncatedNormal: return "truncated_normal";
        case DensityKind::Beta: return "beta";
        case DensityKind::StandardNormal: return "standard_normal";
        case DensityKind::MultivariateNormal: return "multivariate_normal";
        case DensityKind::ChiSquared: return "chi_squared";
        case DensityKind::UniformInterval: return "uniform_interval";
        case DensityKind::GaussianKde: return "gaussian_kde";
        case DensityKind::Product: return "product";
    }
    return "unknown";
}

namespace {

using detail::DensityImpl;
using nlohmann::json;

double tail_z(double tail) {
    return -normal_quantile(std::clamp(tail, 1e-300, 0.5));
}

class UniformBox final : public DensityImpl {
public:
    explicit UniformBox(ParameterDomain box) : box_(std::move(box)) {
        require(box_.bounded(), ErrorKind::Input, "uniform density needs a bounded box");
        inv_volume_ = 1.0 / box_.volume();
    }
    DensityKind kind() const override { return DensityKind::Uniform; }
    std::size_t dim() const override { return box_.dim(); }
    double pdf(std::span<const double> x) const override { return box_.contains(x) ? inv_volume_ : 0.0; }
    void sample_into(RngStream& rng, std::span<double> out) const override {
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = rng.uniform(box_.bound(j).lower, box_.bound(j).upper);
    }
    Interval support_range(std::size_t j, double) const override { return box_.bound(j); }
    json describe() const override {
        json lo = json::array(), hi = json::array();
        for (const auto& b : box_.bounds()) {
            lo.push_back(b.lower);
            hi.push_back(b.upper);
        }
        return {{"kind", "uniform"}, {"lower", lo}, {"upper", hi}};
    }

private:
    ParameterDomain box_;
    double inv_volume_;
};

class DiagonalNormal final : public DensityImpl {
public:
    DiagonalNormal(std::vector<double> mean, std::vector<double> sd, bool standard)
        : mean_(std::move(mean)), sd_(std::move(sd)), standard_(standard) {
        require(!mean_.empty() && mean_.size() == sd_.size(), ErrorKind::Input, "normal mean/stddev lengths differ");
        log_norm_ = 0.0;
        for (double s : sd_) {
            require(s > 0.0 && std::isfinite(s), ErrorKind::Input, "normal stddev must be positive");
            log_norm_ -= std::log(s) + 0.5 * std::log(2.0 * std::numbers::pi);
        }
    }
    DensityKind kind() const override { return standard_ ? DensityKind::StandardNormal : DensityKind::Normal; }
    std::size_t dim() const override { return mean_.size(); }
    double pdf(std::span<const double> x) const override {
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double z = (x[j] - mean_[j]) / sd_[j];
            s += z * z;
        }
        return std::exp(log_norm_ - 0.5 * s);
    }
    void sample_into(RngStream& rng, std::span<double> out) const override {
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = mean_[j] + sd_[j] * rng.standard_normal();
    }
    Interval support_range(std::size_t j, double tail) const override {
        const double z = tail_z(tail);
        return {mean_[j] - z * sd_[j], mean_[j] + z * sd_[j]};
    }
    json describe() const override {
        if (standard_) return {{"kind", "standard_normal"}, {"dim", mean_.size()}};
        return {{"kind", "normal"}, {"mean", mean_}, {"std", sd_}};
    }

private:
    std::vector<double> mean_, sd_;
    bool standard_;
    double log_norm_;
};

class TruncatedNormal final : public DensityImpl {
public:
    TruncatedNormal(double mean, double sd, double lower, double upper, bool renormalize)
        : mean_(mean), sd_(sd), lower_(lower), upper_(upper), renormalize_(renormalize) {
        require(sd_ > 0.0, ErrorKind::Input, "truncated normal stddev must be positive");
        require(lower_ < upper_, ErrorKind::Input, "truncated normal requires lower < upper");
        cdf_lo_ = normal_cdf(lower_, mean_, sd_);
        cdf_hi_ = normal_cdf(upper_, mean_, sd_);
        mass_ = cdf_hi_ - cdf_lo_;
        require(mass_ > 0.0, ErrorKind::Input, "truncation interval carries no normal mass");
    }
    DensityKind kind() const override { return DensityKind::TruncatedNormal; }
    std::size_t dim() const override { return 1; }
    double pdf(std::span<const double> x) const override {
        if (x[0] < lower_ || x[0] > upper_) return 0.0;
        const double p = normal_pdf(x[0], mean_, sd_);
        return renormalize_ ? p / mass_ : p;
    }
    void sample_into(RngStream& rng, std::span<double> out) const override {
        if (mass_ > 0.25) {
            for (;;) {
                const double v = rng.normal(mean_, sd_);
                if (v >= lower_ && v <= upper_) {
                    out[0] = v;
                    return;
                }
            }
        }
        const double u = cdf_lo_ + mass_ * rng.uniform_open();
        out[0] = std::clamp(mean_ + sd_ * normal_quantile(u), lower_, upper_);
    }
    Interval support_range(std::size_t, double tail) const override {
        const double z = tail_z(tail);
        return {std::max(lower_, mean_ - z * sd_), std::min(upper_, mean_ + z * sd_)};
    }
    json describe() const override {
        return {{"kind", "truncated_normal"}, {"mean", mean_}, {"std", sd_},
                {"lower", lower_}, {"upper", upper_}, {"renormalize", renormalize_}};
    }

private:
    double mean_, sd_, lower_, upper_;
    bool renormalize_;
    double cdf_lo_ = 0.0, cdf_hi_ = 0.0, mass_ = 0.0;
};

class BetaBox final : public DensityImpl {
public:
    BetaBox(double alpha, double beta, ParameterDomain box) : alpha_(alpha), beta_(beta), box_(std::move(box)) {
        require(alpha_ > 0.0 && beta_ > 0.0, ErrorKind::Input, "beta parameters must be positive");
        require(box_.bounded(), ErrorKind::Input, "beta density needs a bounded box");
        log_norm_ = -static_cast<double>(box_.dim()) * beta_log_norm(alpha_, beta_) - std::log(box_.volume());
    }
    DensityKind kind() const override { return DensityKind::Beta; }
    std::size_t dim() const override { return box_.dim(); }
    double pdf(std::span<const double> x) const override {
        double logp = log_norm_;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const auto& b = box_.bound(j);
            if (x[j] < b.lower || x[j] > b.upper) return 0.0;
            const double u = (x[j] - b.lower) / b.width();
            logp += (alpha_ - 1.0) * std::log(u) + (beta_ - 1.0) * std::log1p(-u);
        }
        return std::exp(logp);
    }
    void sample_into(RngStream& rng, std::span<double> out) const override {
        for (std::size_t j = 0; j < out.size(); ++j) {
            const auto& b = box_.bound(j);
            out[j] = b.lower + b.width() * rng.beta(alpha_, beta_);
        }
    }
    Interval support_range(std::size_t j, double) const override { return box_.bound(j); }
    json describe() const override {
        json lo = json::array(), hi = json::array();
        for (const auto& b : box_.bounds()) {
            lo.push_back(b.lower);
            hi.push_back(b.upper);
        }
        return {{"kind", "beta"}, {"alpha", alpha_}, {"beta", beta_}, {"lower", lo}, {"upper", hi}};
    }

private:
    double alpha_, beta_;
    ParameterDomain box_;
    double log_norm_;
};

class FullNormal final : public DensityImpl {
public:
    FullNormal(std::vector<double> mean, const Matrix& cov) : mean_(std::move(mean)) {
        const auto n = static_cast<Eigen::Index>(mean_.size());
        require(n >= 1 && cov.rows() == mean_.size() && cov.cols() == mean_.size(), ErrorKind::Input,
                "covariance shape does not match mean");
        Eigen::MatrixXd c(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) c(i, j) = cov(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        require((c - c.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff()),
                ErrorKind::Factorization, "covariance is not symmetric");
        Eigen::LLT<Eigen::MatrixXd> llt(c);
        require(llt.info() == Eigen::Success, ErrorKind::Factorization, "covariance is not positive definite");
        chol_ = llt.matrixL();
        cov_ = c;
        log_norm_ = -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
        for (Eigen::Index i = 0; i < n; ++i) log_norm_ -= std::log(chol_(i, i));
    }
    DensityKind kind() const override { return DensityKind::MultivariateNormal; }
    std::size_t dim() const override { return mean_.size(); }
    double pdf(std::span<const double> x) const override {
        Eigen::VectorXd r(static_cast<Eigen::Index>(x.size()));
        for (std::size_t j = 0; j < x.size(); ++j) r(static_cast<Eigen::Index>(j)) = x[j] - mean_[j];
        chol_.triangularView<Eigen::Lower>().solveInPlace(r);
        return std::exp(log_norm_ - 0.5 * r.squaredNorm());
    }
    void sample_into(RngStream& rng, std::span<double> out) const override {
        Eigen::VectorXd z(static_cast<Eigen::Index>(out.size()));
        for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = rng.standard_normal();
        const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>() * z;
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = mean_[j] + v(static_cast<Eigen::Index>(j));
    }
    Interval support_range(std::size_t j, double tail) const override {
        const double z = tail_z(tail);
        const double s = std::sqrt(cov_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
        return {mean_[j] - z * s, mean_[j] + z * s};
    }
    json describe() const override {
        json rows = json::array();
        for (Eigen::Index i = 0; i < cov_.rows(); ++i) {
            json r = json::array();
            for (Eigen::Index j = 0; j < cov_.cols(); ++j) r.push_back(cov_(i, j));
            rows.push_back(std::move(r));
        }
        return {{"kind", "multivariate_normal"}, {"mean", mean_}, {"covariance", rows}};
    }

private:
    std::vector<double> mean_;
    Eigen::MatrixXd chol_;
    Eigen::MatrixXd cov_;
    double log_norm_ = 0.0;
};

class ChiSquared final : public DensityImpl {
public:
    explicit ChiSquared(double dof) : dof_(dof) {
        require(dof_ > 0.0, ErrorKind::Input, "chi-squared needs dof > 0");
    }
    DensityKind kind() const override { return DensityKind::ChiSquared; }
    std::size_t dim() const override { return 1; }
    double pdf(std::span<const double> x) const override {
        return x[0] < 0.0 ? 0.0 : chi2_pdf(dof_, x[0]);
    }
    void sample_into(RngStream& rng, std::span<double> out) const override {
        out[0] = 2.0 * rng.gamma(0.5 * dof_);
    }
    Interval support_range(std::size_t, double tail) const override {
        return {0.0, chi2_quantile(dof_, 1.0 - std::max(tail, 1e-15))};
    }
    json describe() const override { return {{"kind", "chi_squared"}, {"dof", dof_}}; }

private:
    double dof_;
};

class UniformInterval final : public DensityImpl {
public:
    UniformInterval(double a, double b) : a_(a), b_(b) {
        require(std::isfinite(a_) && std::isfinite(b_) && a_ < b_, ErrorKind::Input,
                "uniform interval requires finite a < b");
    }
    DensityKind kind() const override { return DensityKind::UniformInterval; }
    std::size_t dim() const override { return 1; }
    double pdf(std::span<const double> x) const override {
        return (x[0] >= a_ && x[0] <= b_) ? 1.0 / (b_ - a_) : 0.0;
    }
    void sample_into(RngStream& rng, std::span<double> out) const override { out[0] = rng.uniform(a_, b_); }
    Interval support_range(std::size_t, double) const override { return {a_, b_}; }
    json describe() const override { return {{"kind", "uniform_interval"}, {"a", a_}, {"b", b_}}; }

private:
    double a_, b_;
};

class ProductDensity final : public DensityImpl {
public:
    explicit ProductDensity(std::vector<DensityModel> parts) : parts_(std::move(parts)) {
        require(!parts_.empty(), ErrorKind::Input, "product density needs at least one component");
        for (const auto& p : parts_) {
            require(p.dim() == 1, ErrorKind::Input, "product components must be 1-D");
        }
    }
    DensityKind kind() const override { return DensityKind::Product; }
    std::size_t dim() const override { return parts_.size(); }
    double pdf(std::span<const double> x) const override {
        double p = 1.0;
        for (std::size_t j = 0; j < parts_.size() && p > 0.0; ++j) p *= parts_[j].pdf(x[j]);
        return p;
    }
    bool sampleable() const override {
        return std::all_of(parts_.begin(), parts_.end(), [](const DensityModel& p) { return p.sampleable(); });
    }
    void sample_into(RngStream& rng, std::span<double> out) const override {
        for (std::size_t j = 0; j < parts_.size(); ++j) out[j] = parts_[j].sample(1, rng)(0, 0);
    }
    Interval support_range(std::size_t j, double tail) const override { return parts_[j].support_range(0, tail); }
    json describe() const override {
        json parts = json::array();
        for (const auto& p : parts_) parts.push_back(p.describe());
        return {{"kind", "product"}, {"components", parts}};
    }

private:
    std::vector<DensityModel> parts_;
};

}  // namespace

DensityModel::DensityModel(std::shared_ptr<const detail::DensityImpl> impl) : impl_(std::move(impl)) {
    require(impl_ != nullptr, ErrorKind::Input, "null density");
}

double DensityModel::pdf(std::span<const double> x) const {
    require(x.size() == impl_->dim(), ErrorKind::Input,
            std::string(to_string(kind())) + " density: expected point of length " + std::to_string(impl_->dim()) +
                ", got " + std::to_string(x.size()));
    return impl_->pdf(x);
}

double DensityModel::pdf(double x) const {
    return pdf(std::span<const double>(&x, 1));
}

std::vector<double> DensityModel::pdf_rows(const Matrix& points, std::size_t workers) const {
    require(points.empty() || points.cols() == dim(), ErrorKind::Input, "point rows do not match density dim");
    std::vector<double> out(points.rows());
    parallel_for(points.rows(), workers, [&](std::size_t i) { out[i] = impl_->pdf(points.row(i)); });
    return out;
}

Matrix DensityModel::sample(std::size_t count, RngStream& rng) const {
    require(impl_->sampleable(), ErrorKind::Unsupported,
            std::string(to_string(kind())) + " density is not sampleable in this configuration");
    Matrix out(count, dim());
    for (std::size_t i = 0; i < count; ++i) impl_->sample_into(rng, out.row(i));
    return out;
}

Interval DensityModel::support_range(std::size_t j, double tail) const {
    require(j < dim(), ErrorKind::Input, "support_range dimension out of range");
    return impl_->support_range(j, tail);
}

const GaussianKde* DensityModel::as_kde() const {
    return dynamic_cast<const GaussianKde*>(impl_.get());
}

DensityModel uniform_box(const ParameterDomain& box) {
    return DensityModel(std::make_shared<UniformBox>(box));
}

DensityModel normal(std::vector<double> mean, std::vector<double> stddev) {
    return DensityModel(std::make_shared<DiagonalNormal>(std::move(mean), std::move(stddev), false));
}

DensityModel normal(double mean, double stddev) {
    return normal(std::vector<double>{mean}, std::vector<double>{stddev});
}

DensityModel truncated_normal(double mean, double stddev, double lower, double upper, bool renormalize) {
    return DensityModel(std::make_shared<TruncatedNormal>(mean, stddev, lower, upper, renormalize));
}

DensityModel beta(double alpha, double beta_param, const ParameterDomain& box) {
    return DensityModel(std::make_shared<BetaBox>(alpha, beta_param, box));
}

DensityModel standard_normal(std::size_t dim) {
    require(dim >= 1, ErrorKind::Input, "standard normal needs dim >= 1");
    return DensityModel(std::make_shared<DiagonalNormal>(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0), true));
}

DensityModel multivariate_normal(std::vector<double> mean, const Matrix& covariance) {
    return DensityModel(std::make_shared<FullNormal>(std::move(mean), covariance));
}

DensityModel chi_squared(double dof) {
    return DensityModel(std::make_shared<ChiSquared>(dof));
}

DensityModel uniform_interval(double a, double b) {
    return DensityModel(std::make_shared<UniformInterval>(a, b));
}

DensityModel product(std::vector<DensityModel> components) {
    return DensityModel(std::make_shared<ProductDensity>(std::move(components)));
}

}  // namespace cbayes
