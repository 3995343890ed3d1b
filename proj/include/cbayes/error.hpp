#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cbayes {

enum class ErrorKind {
    Input,
    DegenerateData,
    Unsupported,
    Domain,
    ModelEvaluation,
    EmptyPosterior,
    Dominance,
    InsufficientCoverage,
    Factorization,
    Config,
    MissingInput,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct RowFailure {
    std::size_t row;
    std::string message;
};

/// Thrown by evaluate_batch after every row has been attempted; carries all
/// failing rows in ascending order.
class BatchEvaluationError : public Error {
public:
    explicit BatchEvaluationError(std::vector<RowFailure> failures);

    const std::vector<RowFailure>& failures() const noexcept { return failures_; }

private:
    std::vector<RowFailure> failures_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition) fail(kind, what);
}

}  // namespace cbayes
