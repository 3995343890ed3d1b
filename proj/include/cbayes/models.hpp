#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbayes/core.hpp"
#include "cbayes/density.hpp"

namespace cbayes {

/// x2 of  lambda1 x1^2 + x2^2 = 1,  x1^2 - lambda2 x2^2 = 1  (positive root).
ForwardModel nonlinear_system();
ParameterDomain nonlinear_system_domain();

/// Four-branch piecewise map on [-1, 1]^d; the circular branch is only
/// active for d = 2.
ForwardModel piecewise_smooth(std::size_t dim = 2);
/// Index (1-4) of the branch that fires at x, in definition order.
int piecewise_branch(std::span<const double> x);

/// q = lambda^p on [-1, 1]; p must be odd.
ForwardModel monomial(int power);

/// Quadratic forms (lambda - mu_i)^T C_i^{-1} (lambda - mu_i) over m diagonal
/// blocks of a d-dimensional parameter. One block gives the scalar chi-squared
/// model.
struct QuadraticFormSpec {
    std::size_t dim = 2;
    std::size_t qoi_count = 1;
    /// Identity blocks when unset; otherwise C_i = A_i^T A_i with standard
    /// normal A_i drawn from this seed.
    std::optional<std::uint64_t> covariance_seed;
    /// Mean of the parameter; zero when empty.
    std::vector<double> mean;

    void validate() const;
    std::size_t block_dim() const { return dim / qoi_count; }
};

struct QuadraticModel {
    ForwardModel model;
    /// Prior N(mu, C) under which the exact push-forward holds.
    DensityModel prior;
    /// ChiSquared(d), or a product of ChiSquared(d / m) marginals.
    DensityModel exact_pushforward;
    /// Block-diagonal covariance, row-major d x d.
    Matrix covariance;
};

QuadraticModel quadratic_chi2(const QuadraticFormSpec& spec);

enum class BlockQuantile {
    /// Per-QoI levels 1/2 -+ (1/5)^(1/m) / 2, so the box carries push-forward
    /// mass exactly 1/5 for every m.
    MassPreserving,
    /// Levels 1/2 -+ (1/5)^(1/m) as literally written; invalid unless both
    /// levels land in (0, 1).
    Literal,
};

BlockQuantile parse_block_quantile(const std::string& name);
const char* to_string(BlockQuantile variant) noexcept;

/// Uniform observed density on the quantile-matched interval (m = 1) or box.
DensityModel quantile_matched_uniform_observed(std::size_t dim, std::size_t qoi_count,
                                               BlockQuantile variant = BlockQuantile::MassPreserving);

struct RegisteredModel {
    ForwardModel model;
    ParameterDomain domain;
};

/// Names: nonlinear-system, piecewise-2d, chi2-quadratic, chi2-block,
/// monomial-p1, monomial-p3, monomial-p5. The chi2 entries use identity
/// covariance with d = 2 (and m = 2 blocks over d = 4 for chi2-block).
RegisteredModel make_registered_model(const std::string& name);
std::vector<std::string> registered_model_names();

}  // namespace cbayes
