#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cbayes/core.hpp"
#include "json.hpp"

namespace cbayes {

enum class DensityKind {
    Uniform,
    Normal,
    TruncatedNormal,
    Beta,
    StandardNormal,
    MultivariateNormal,
    ChiSquared,
    UniformInterval,
    GaussianKde,
    Product,
};

const char* to_string(DensityKind kind) noexcept;

namespace detail {

class DensityImpl {
public:
    virtual ~DensityImpl() = default;
    virtual DensityKind kind() const = 0;
    virtual std::size_t dim() const = 0;
    /// Dimension already checked by the caller.
    virtual double pdf(std::span<const double> x) const = 0;
    virtual bool sampleable() const { return true; }
    virtual void sample_into(RngStream& rng, std::span<double> out) const = 0;
    virtual Interval support_range(std::size_t j, double tail) const = 0;
    virtual nlohmann::json describe() const = 0;
};

}  // namespace detail

class GaussianKde;

/// Immutable, shareable handle to a probability density on R^k.
///
/// pdf() is non-negative everywhere and zero outside the support. Copies share
/// the underlying density; same_as() tests that identity.
class DensityModel {
public:
    explicit DensityModel(std::shared_ptr<const detail::DensityImpl> impl);

    DensityKind kind() const { return impl_->kind(); }
    std::size_t dim() const { return impl_->dim(); }
    bool sampleable() const { return impl_->sampleable(); }

    double pdf(std::span<const double> x) const;
    /// Convenience for 1-D densities.
    double pdf(double x) const;
    std::vector<double> pdf_rows(const Matrix& points, std::size_t workers = 1) const;

    Matrix sample(std::size_t count, RngStream& rng) const;

    /// A finite interval holding all but about `tail` of the marginal mass in
    /// dimension j on each side (the exact support when it is bounded).
    Interval support_range(std::size_t j = 0, double tail = 1e-10) const;

    nlohmann::json describe() const { return impl_->describe(); }

    /// Non-null when kind() == GaussianKde.
    const GaussianKde* as_kde() const;

    bool same_as(const DensityModel& other) const noexcept { return impl_ == other.impl_; }

private:
    std::shared_ptr<const detail::DensityImpl> impl_;
};

DensityModel uniform_box(const ParameterDomain& box);
DensityModel normal(std::vector<double> mean, std::vector<double> stddev);
DensityModel normal(double mean, double stddev);
/// 1-D normal restricted to [lower, upper]. With renormalize = false the
/// density is the untruncated normal pdf clipped to the interval, so it does
/// not integrate to 1.
DensityModel truncated_normal(double mean, double stddev, double lower, double upper, bool renormalize = false);
/// Independent Beta(alpha, beta) in every dimension, affinely mapped onto the box.
DensityModel beta(double alpha, double beta, const ParameterDomain& box);
DensityModel standard_normal(std::size_t dim);
/// Full-covariance normal; covariance given row-major, must be SPD.
DensityModel multivariate_normal(std::vector<double> mean, const Matrix& covariance);
DensityModel chi_squared(double dof);
DensityModel uniform_interval(double a, double b);
/// Tensor product of 1-D densities.
DensityModel product(std::vector<DensityModel> components);

// ---------------------------------------------------------------------------
// Gaussian kernel density estimation

struct BandwidthRule {
    enum class Kind { Silverman, Scott, LikelihoodCV, Explicit };

    Kind kind = Kind::Silverman;
    std::vector<double> bandwidth;  // Explicit only

    static BandwidthRule silverman() { return {Kind::Silverman, {}}; }
    static BandwidthRule scott() { return {Kind::Scott, {}}; }
    /// Silverman bandwidths times one scalar chosen by leave-one-out
    /// likelihood cross-validation.
    static BandwidthRule likelihood_cv() { return {Kind::LikelihoodCV, {}}; }
    static BandwidthRule explicit_bandwidth(std::vector<double> h) { return {Kind::Explicit, std::move(h)}; }

    std::string name() const;
    static BandwidthRule parse(const std::string& name);
};

/// (4 / (k + 2))^(1 / (k + 4)) * M^(-1 / (k + 4))
double silverman_factor(std::size_t count, std::size_t dim);
/// M^(-1 / (k + 4))
double scott_factor(std::size_t count, std::size_t dim);

/// Product-Gaussian KDE with a diagonal bandwidth.
///
/// Support points are stored sorted lexicographically, so the estimate does
/// not depend on the order they were supplied in. Kernels centred more than
/// kCutoff bandwidths from the query in the first coordinate contribute less
/// than exp(-kCutoff^2 / 2) ~ 2.6e-18 of their peak and are skipped; every
/// other kernel is summed in full.
class GaussianKde final : public detail::DensityImpl {
public:
    static constexpr double kCutoff = 9.0;

    GaussianKde(Matrix points, std::vector<double> bandwidth, std::string rule);

    DensityKind kind() const override { return DensityKind::GaussianKde; }
    std::size_t dim() const override { return points_.cols(); }
    double pdf(std::span<const double> x) const override;
    void sample_into(RngStream& rng, std::span<double> out) const override;
    Interval support_range(std::size_t j, double tail) const override;
    nlohmann::json describe() const override;

    const Matrix& points() const noexcept { return points_; }
    const std::vector<double>& bandwidth() const noexcept { return bandwidth_; }
    const std::string& rule() const noexcept { return rule_; }
    std::size_t count() const noexcept { return points_.rows(); }

    /// Sum of unnormalized kernels at x, skipping support row `skip`.
    double kernel_sum(std::span<const double> x, std::size_t skip = static_cast<std::size_t>(-1)) const;
    /// Mean leave-one-out log density over the support points.
    double loo_log_likelihood() const;

private:
    Matrix points_;
    std::vector<double> first_;
    std::vector<double> bandwidth_;
    std::vector<double> inv_bandwidth_;
    std::string rule_;
    double norm_ = 0.0;
};

/// Fits a KDE to the rows of `points` (M x k). Needs M >= 2 and nonzero
/// spread in every dimension unless the rule is Explicit.
DensityModel fit_gkde(const Matrix& points, const BandwidthRule& rule = BandwidthRule::silverman());
DensityModel make_kde(Matrix points, std::vector<double> bandwidth, std::string rule = "explicit");

std::vector<double> sample_stddev(const Matrix& points);

}  // namespace cbayes
