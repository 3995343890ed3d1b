#include "cbayes/models.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <memory>

#include "cbayes/special.hpp"

namespace cbayes {

ForwardModel nonlinear_system() {
    return ForwardModel("nonlinear-system", 2, 1, [](std::span<const double> lam, std::span<double> out) {
        // Linear in (x1^2, x2^2): x2^2 = (1 - l1) / (1 + l1 l2).
        const double denom = 1.0 + lam[0] * lam[1];
        const double x2sq = (1.0 - lam[0]) / denom;
        if (!(denom != 0.0) || !(x2sq >= 0.0)) {
            throw Error(ErrorKind::Domain, "nonlinear system has no real solution at this parameter");
        }
        out[0] = std::sqrt(x2sq);
    });
}

ParameterDomain nonlinear_system_domain() {
    const double w = 4.5 * std::sqrt(0.1);
    return ParameterDomain({{0.79, 0.99}, {1.0 - w, 1.0 + w}});
}

int piecewise_branch(std::span<const double> x) {
    const bool upper = 3.0 * x[0] + 2.0 * x[1] >= 0.0;
    const bool left = -x[0] + 0.3 * x[1] < 0.0;
    if (upper && left) return 1;
    if (upper) return 2;
    const double cx = x[0] + 1.0, cy = x[1] + 1.0;
    if (x.size() == 2 && cx * cx + cy * cy < 0.95 * 0.95) return 3;
    return 4;
}

ForwardModel piecewise_smooth(std::size_t dim) {
    require(dim >= 2, ErrorKind::Input, "piecewise map needs d >= 2");
    const std::string name = dim == 2 ? "piecewise-2d" : "piecewise-" + std::to_string(dim) + "d";
    return ForwardModel(name, dim, 1, [dim](std::span<const double> x, std::span<double> out) {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        const double q1 = std::exp(-r2) - x[0] * x[0] * x[0] - x[1] * x[1] * x[1];
        const double q2 = 1.0 + q1 + r2 / (4.0 * static_cast<double>(dim));
        switch (piecewise_branch(x)) {
            case 1: out[0] = q1 - 2.0; break;
            case 2: out[0] = 2.0 * q2; break;
            case 3: out[0] = 2.0 * q1 + 4.0; break;
            default: out[0] = q1; break;
        }
    });
}

ForwardModel monomial(int power) {
    require(power >= 1 && power % 2 == 1, ErrorKind::Input,
            "monomial power must be an odd positive integer, got " + std::to_string(power));
    return ForwardModel("monomial-p" + std::to_string(power), 1, 1,
                        [power](std::span<const double> lam, std::span<double> out) {
                            double v = 1.0;
                            for (int i = 0; i < power; ++i) v *= lam[0];
                            out[0] = v;
                        });
}

void QuadraticFormSpec::validate() const {
    require(dim >= 1 && qoi_count >= 1, ErrorKind::Input, "quadratic form needs d >= 1 and m >= 1");
    require(dim % qoi_count == 0, ErrorKind::Input,
            "d = " + std::to_string(dim) + " is not divisible by m = " + std::to_string(qoi_count));
    require(mean.empty() || mean.size() == dim, ErrorKind::Input, "quadratic form mean has wrong length");
}

namespace {

struct QuadraticFactors {
    std::size_t block;
    std::vector<double> mean;
    std::vector<Eigen::MatrixXd> lower;  // Cholesky factor per block
};

}  // namespace

QuadraticModel quadratic_chi2(const QuadraticFormSpec& spec) {
    spec.validate();
    const std::size_t d = spec.dim, m = spec.qoi_count, k = spec.block_dim();
    const auto ki = static_cast<Eigen::Index>(k);

    auto factors = std::make_shared<QuadraticFactors>();
    factors->block = k;
    factors->mean = spec.mean.empty() ? std::vector<double>(d, 0.0) : spec.mean;
    Matrix cov(d, d);
    for (std::size_t b = 0; b < m; ++b) {
        Eigen::MatrixXd c = Eigen::MatrixXd::Identity(ki, ki);
        if (spec.covariance_seed) {
            RngStream rng = RngStream(*spec.covariance_seed).split(b);
            Eigen::MatrixXd a(ki, ki);
            for (Eigen::Index i = 0; i < ki; ++i)
                for (Eigen::Index j = 0; j < ki; ++j) a(i, j) = rng.standard_normal();
            c = a.transpose() * a;
        }
        Eigen::LLT<Eigen::MatrixXd> llt(c);
        require(llt.info() == Eigen::Success, ErrorKind::Factorization,
                "block " + std::to_string(b) + " covariance is not positive definite");
        factors->lower.push_back(llt.matrixL());
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                cov(b * k + i, b * k + j) = c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

    const std::string name = m == 1 ? "chi2-quadratic" : "chi2-block";
    ForwardModel model(name, d, m, [factors](std::span<const double> lam, std::span<double> out) {
        const std::size_t kb = factors->block;
        Eigen::VectorXd r(static_cast<Eigen::Index>(kb));
        for (std::size_t b = 0; b < out.size(); ++b) {
            for (std::size_t i = 0; i < kb; ++i) {
                r(static_cast<Eigen::Index>(i)) = lam[b * kb + i] - factors->mean[b * kb + i];
            }
            // r^T C^{-1} r = |L^{-1} r|^2 with C = L L^T.
            factors->lower[b].triangularView<Eigen::Lower>().solveInPlace(r);
            out[b] = r.squaredNorm();
        }
    });

    DensityModel prior = multivariate_normal(factors->mean, cov);
    DensityModel exact = chi_squared(static_cast<double>(k));
    if (m > 1) {
        exact = product(std::vector<DensityModel>(m, chi_squared(static_cast<double>(k))));
    }
    return QuadraticModel{std::move(model), std::move(prior), std::move(exact), std::move(cov)};
}

BlockQuantile parse_block_quantile(const std::string& name) {
    if (name == "mass-preserving") return BlockQuantile::MassPreserving;
    if (name == "paper" || name == "literal") return BlockQuantile::Literal;
    fail(ErrorKind::Config, "unknown block-quantile variant '" + name + "' (expected paper or mass-preserving)");
}

const char* to_string(BlockQuantile variant) noexcept {
    return variant == BlockQuantile::MassPreserving ? "mass-preserving" : "paper";
}

DensityModel quantile_matched_uniform_observed(std::size_t dim, std::size_t qoi_count, BlockQuantile variant) {
    QuadraticFormSpec{dim, qoi_count, std::nullopt, {}}.validate();
    const double k = static_cast<double>(dim / qoi_count);
    const double spread = std::pow(0.2, 1.0 / static_cast<double>(qoi_count));
    const double half = variant == BlockQuantile::MassPreserving ? 0.5 * spread : spread;
    const double lo = 0.5 - half, hi = 0.5 + half;
    require(lo > 0.0 && hi < 1.0, ErrorKind::Input,
            "block quantile levels [" + std::to_string(lo) + ", " + std::to_string(hi) + "] fall outside (0, 1) for m = " +
                std::to_string(qoi_count));
    const double a = chi2_quantile(k, lo), b = chi2_quantile(k, hi);
    if (qoi_count == 1) return uniform_interval(a, b);
    return product(std::vector<DensityModel>(qoi_count, uniform_interval(a, b)));
}

std::vector<std::string> registered_model_names() {
    return {"nonlinear-system", "piecewise-2d", "chi2-quadratic", "chi2-block", "monomial-p1", "monomial-p3", "monomial-p5"};
}

RegisteredModel make_registered_model(const std::string& name) {
    if (name == "nonlinear-system") return {nonlinear_system(), nonlinear_system_domain()};
    if (name == "piecewise-2d") return {piecewise_smooth(2), ParameterDomain::cube(2, -1.0, 1.0)};
    if (name == "chi2-quadratic") {
        return {quadratic_chi2({2, 1, std::nullopt, {}}).model, ParameterDomain::unbounded(2)};
    }
    if (name == "chi2-block") {
        return {quadratic_chi2({4, 2, std::nullopt, {}}).model, ParameterDomain::unbounded(4)};
    }
    for (int p : {1, 3, 5}) {
        if (name == "monomial-p" + std::to_string(p)) return {monomial(p), ParameterDomain::cube(1, -1.0, 1.0)};
    }
    fail(ErrorKind::Config, "unknown model '" + name + "'");
}

}  // namespace cbayes
