#include "cbayes/core.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace cbayes {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Input: return "input";
        case ErrorKind::DegenerateData: return "degenerate-data";
        case ErrorKind::Unsupported: return "unsupported";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::ModelEvaluation: return "model-evaluation";
        case ErrorKind::EmptyPosterior: return "empty-posterior";
        case ErrorKind::Dominance: return "dominance";
        case ErrorKind::InsufficientCoverage: return "insufficient-coverage";
        case ErrorKind::Factorization: return "factorization";
        case ErrorKind::Config: return "config";
        case ErrorKind::MissingInput: return "missing-input";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

namespace {

std::string describe_failures(const std::vector<RowFailure>& failures) {
    std::ostringstream os;
    os << failures.size() << " row(s) failed model evaluation";
    const std::size_t shown = std::min<std::size_t>(failures.size(), 5);
    for (std::size_t i = 0; i < shown; ++i) {
        os << (i == 0 ? ": " : "; ") << "row " << failures[i].row << ": " << failures[i].message;
    }
    if (shown < failures.size()) os << "; ...";
    return os.str();
}

}  // namespace

BatchEvaluationError::BatchEvaluationError(std::vector<RowFailure> failures)
    : Error(ErrorKind::ModelEvaluation, describe_failures(failures)), failures_(std::move(failures)) {}

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_, ErrorKind::Input, "matrix data size does not match shape");
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    const std::size_t cols = rows.front().size();
    Matrix m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i].size() == cols, ErrorKind::Input, "ragged rows");
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
}

std::vector<double> Matrix::column(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

Matrix Matrix::head(std::size_t n) const {
    n = std::min(n, rows_);
    return Matrix(n, cols_, std::vector<double>(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(n * cols_)));
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t k = 0; k < indices.size(); ++k) {
        require(indices[k] < rows_, ErrorKind::Input, "row index out of range");
        auto src = row(indices[k]);
        std::copy(src.begin(), src.end(), out.row(k).begin());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Domain

bool Interval::finite() const noexcept {
    return std::isfinite(lower) && std::isfinite(upper);
}

ParameterDomain::ParameterDomain(std::vector<Interval> bounds) : bounds_(std::move(bounds)) {
    require(!bounds_.empty(), ErrorKind::Input, "parameter domain needs dim >= 1");
    for (std::size_t j = 0; j < bounds_.size(); ++j) {
        const auto& b = bounds_[j];
        require(!std::isnan(b.lower) && !std::isnan(b.upper), ErrorKind::Input, "NaN domain bound");
        require(b.lower < b.upper, ErrorKind::Input,
                "domain bound " + std::to_string(j) + " requires lower < upper");
    }
}

ParameterDomain ParameterDomain::box(std::span<const double> lower, std::span<const double> upper) {
    require(lower.size() == upper.size(), ErrorKind::Input, "box bound lengths differ");
    std::vector<Interval> b(lower.size());
    for (std::size_t j = 0; j < b.size(); ++j) b[j] = {lower[j], upper[j]};
    return ParameterDomain(std::move(b));
}

ParameterDomain ParameterDomain::cube(std::size_t dim, double lower, double upper) {
    return ParameterDomain(std::vector<Interval>(dim, Interval{lower, upper}));
}

ParameterDomain ParameterDomain::unbounded(std::size_t dim) {
    return ParameterDomain(std::vector<Interval>(dim, Interval{}));
}

bool ParameterDomain::bounded() const noexcept {
    return std::all_of(bounds_.begin(), bounds_.end(), [](const Interval& b) { return b.finite(); });
}

bool ParameterDomain::contains(std::span<const double> x) const {
    require(x.size() == dim(), ErrorKind::Input, "point dimension does not match domain");
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!bounds_[j].contains(x[j])) return false;
    }
    return true;
}

double ParameterDomain::volume() const {
    double v = 1.0;
    for (const auto& b : bounds_) v *= b.width();
    return v;
}

// ---------------------------------------------------------------------------
// Forward model

ForwardModel::ForwardModel(std::string name, std::size_t in_dim, std::size_t out_dim, Kernel kernel)
    : name_(std::move(name)), in_dim_(in_dim), out_dim_(out_dim), kernel_(std::move(kernel)) {
    require(in_dim_ >= 1 && out_dim_ >= 1, ErrorKind::Input, "forward model dims must be >= 1");
    require(static_cast<bool>(kernel_), ErrorKind::Input, "forward model needs an evaluation kernel");
}

std::vector<double> ForwardModel::operator()(std::span<const double> lambda) const {
    std::vector<double> out(out_dim_);
    evaluate_into(lambda, out);
    return out;
}

void ForwardModel::evaluate_into(std::span<const double> lambda, std::span<double> out) const {
    require(lambda.size() == in_dim_, ErrorKind::Input,
            name_ + ": expected input of length " + std::to_string(in_dim_) + ", got " +
                std::to_string(lambda.size()));
    require(out.size() == out_dim_, ErrorKind::Input, name_ + ": output buffer has wrong length");
    kernel_(lambda, out);
}

// ---------------------------------------------------------------------------
// Sample batch

SampleBatch::SampleBatch(Matrix params, Matrix qois, std::uint64_t seed, std::string model_name)
    : params_(std::move(params)), qois_(std::move(qois)), seed_(seed), model_name_(std::move(model_name)) {
    require(params_.rows() == qois_.rows(), ErrorKind::Input, "params and qois row counts differ");
}

SampleBatch SampleBatch::head(std::size_t n) const {
    return SampleBatch(params_.head(n), qois_.head(n), seed_, model_name_);
}

SampleBatch SampleBatch::select(std::span<const std::size_t> rows) const {
    return SampleBatch(params_.select_rows(rows), qois_.select_rows(rows), seed_, model_name_);
}

void SampleBatch::check_inside(const ParameterDomain& domain) const {
    require(param_dim() == domain.dim(), ErrorKind::Input, "batch dimension does not match domain");
    for (std::size_t i = 0; i < count(); ++i) {
        require(domain.contains(params_.row(i)), ErrorKind::Input,
                "batch row " + std::to_string(i) + " lies outside the parameter domain");
    }
}

// ---------------------------------------------------------------------------
// Batch evaluation

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                // Contiguous chunks; the chunking does not affect what is written where.
                const std::size_t begin = n * w / workers;
                const std::size_t end = n * (w + 1) / workers;
                try {
                    for (std::size_t i = begin; i < end; ++i) body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            });
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

Matrix evaluate_batch(const ForwardModel& model, const Matrix& params, std::size_t workers) {
    require(workers >= 1, ErrorKind::Input, "workers must be positive");
    require(params.empty() || params.cols() == model.in_dim(), ErrorKind::Input,
            model.name() + ": parameter rows have length " + std::to_string(params.cols()) +
                ", model expects " + std::to_string(model.in_dim()));
    Matrix out(params.rows(), model.out_dim());
    std::vector<std::string> messages(params.rows());
    std::vector<char> failed(params.rows(), 0);
    parallel_for(params.rows(), workers, [&](std::size_t i) {
        try {
            model.evaluate_into(params.row(i), out.row(i));
            for (double v : out.row(i)) {
                if (!std::isfinite(v)) throw Error(ErrorKind::ModelEvaluation, "non-finite QoI");
            }
        } catch (const std::exception& e) {
            failed[i] = 1;
            messages[i] = e.what();
        }
    });
    std::vector<RowFailure> failures;
    for (std::size_t i = 0; i < params.rows(); ++i) {
        if (failed[i]) failures.push_back({i, std::move(messages[i])});
    }
    if (!failures.empty()) throw BatchEvaluationError(std::move(failures));
    return out;
}

Matrix sample_uniform(const ParameterDomain& domain, std::size_t count, RngStream& rng) {
    require(domain.bounded(), ErrorKind::Input, "uniform sampling needs a bounded domain");
    Matrix out(count, domain.dim());
    for (std::size_t i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < domain.dim(); ++j) {
            const auto& b = domain.bound(j);
            out(i, j) = rng.uniform(b.lower, b.upper);
        }
    }
    return out;
}

}  // namespace cbayes
