#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cbayes/error.hpp"
#include "cbayes/rng.hpp"

namespace cbayes {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Dense row-major matrix of doubles. Sample arrays are always rows = samples.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double> column(std::size_t j) const;
    /// Rows [0, n).
    Matrix head(std::size_t n) const;
    Matrix select_rows(std::span<const std::size_t> indices) const;

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct Interval {
    double lower = -kInf;
    double upper = kInf;

    bool finite() const noexcept;
    bool contains(double x) const noexcept { return x >= lower && x <= upper; }
    double width() const noexcept { return upper - lower; }
};

/// The parameter space: a (possibly unbounded) box in R^n.
class ParameterDomain {
public:
    explicit ParameterDomain(std::vector<Interval> bounds);

    static ParameterDomain box(std::span<const double> lower, std::span<const double> upper);
    static ParameterDomain cube(std::size_t dim, double lower, double upper);
    static ParameterDomain unbounded(std::size_t dim);

    std::size_t dim() const noexcept { return bounds_.size(); }
    const std::vector<Interval>& bounds() const noexcept { return bounds_; }
    const Interval& bound(std::size_t j) const { return bounds_.at(j); }
    bool bounded() const noexcept;
    bool contains(std::span<const double> x) const;
    double volume() const;

private:
    std::vector<Interval> bounds_;
};

/// A deterministic map R^n -> R^m. Evaluation must be pure and thread-safe.
class ForwardModel {
public:
    using Kernel = std::function<void(std::span<const double> in, std::span<double> out)>;

    ForwardModel(std::string name, std::size_t in_dim, std::size_t out_dim, Kernel kernel);

    const std::string& name() const noexcept { return name_; }
    std::size_t in_dim() const noexcept { return in_dim_; }
    std::size_t out_dim() const noexcept { return out_dim_; }

    std::vector<double> operator()(std::span<const double> lambda) const;
    void evaluate_into(std::span<const double> lambda, std::span<double> out) const;

private:
    std::string name_;
    std::size_t in_dim_;
    std::size_t out_dim_;
    Kernel kernel_;
};

/// Prior samples paired with their QoI images.
class SampleBatch {
public:
    SampleBatch(Matrix params, Matrix qois, std::uint64_t seed, std::string model_name);

    const Matrix& params() const noexcept { return params_; }
    const Matrix& qois() const noexcept { return qois_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::string& model_name() const noexcept { return model_name_; }
    std::size_t count() const noexcept { return params_.rows(); }
    std::size_t param_dim() const noexcept { return params_.cols(); }
    std::size_t qoi_dim() const noexcept { return qois_.cols(); }

    SampleBatch head(std::size_t n) const;
    SampleBatch select(std::span<const std::size_t> rows) const;
    /// Throws Input when any params row falls outside the domain.
    void check_inside(const ParameterDomain& domain) const;

private:
    Matrix params_;
    Matrix qois_;
    std::uint64_t seed_;
    std::string model_name_;
};

/// Runs body(i) for i in [0, n) on up to `workers` threads. Each index is
/// visited exactly once; results must be written to index-owned slots.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

/// Row i of the result is model(params.row(i)) regardless of worker count.
/// Failing rows are collected and reported together in BatchEvaluationError.
Matrix evaluate_batch(const ForwardModel& model, const Matrix& params, std::size_t workers = 1);

Matrix sample_uniform(const ParameterDomain& domain, std::size_t count, RngStream& rng);

}  // namespace cbayes
