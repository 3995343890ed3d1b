#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "cbayes/core.hpp"
#include "cbayes/density.hpp"
#include "json.hpp"

namespace cbayes {

// Total variation here is the full integral of |p - q| with no factor of 1/2,
// so it ranges over [0, 2].

using ScalarPdf = std::function<double(double)>;

/// Trapezoid estimate of the integral of |p - q| over `support`, with the
/// interval cut at `breakpoints` (use them for known jumps).
double tv_distance_quadrature(const ScalarPdf& p, const ScalarPdf& q, Interval support, std::size_t nodes = 20001,
                              const std::vector<double>& breakpoints = {});

/// Same for 1-D density models. Without a support the union of both
/// densities' 1e-10 tail ranges is used. nodes = 0 picks at least 4001 and
/// at least eight per bandwidth of any KDE involved.
double tv_distance_quadrature(const DensityModel& p, const DensityModel& q,
                              std::optional<Interval> support = std::nullopt, std::size_t nodes = 0);

/// (1/M) sum |p(x_i) - q(x_i)| / s(x_i) over a batch drawn from the sampler s.
double tv_distance_mc(const std::function<double(std::span<const double>)>& p,
                      const std::function<double(std::span<const double>)>& q, const DensityModel& sampler,
                      const Matrix& batch);

struct L1Error {
    double value = 0.0;
    std::size_t violations = 0;
};

/// (1/N) sum |obs/pf - obs/pf_hat| over the QoI rows; both denominators are
/// floored like PosteriorHandle::ratio and floored rows are counted.
L1Error posterior_l1_error(const DensityModel& exact_pf, const DensityModel& approx_pf, const DensityModel& observed,
                           const Matrix& qois, double ratio_floor = 1e-12);

struct ConvergenceRecord {
    std::size_t dim = 0;
    std::size_t qoi_count = 0;
    std::vector<double> sample_sizes;
    /// Median error at each sample size.
    std::vector<double> errors;
    /// errors_by_rep[i][r]: error at sample size i in repetition r.
    std::vector<std::vector<double>> errors_by_rep;
    std::size_t repetitions = 0;
    std::optional<double> fitted_slope;

    nlohmann::json to_json() const;
};

/// Least-squares slope of log(error) on log(N); also stored in the record.
double fit_rate(ConvergenceRecord& record);
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

double median(std::vector<double> values);

}  // namespace cbayes
