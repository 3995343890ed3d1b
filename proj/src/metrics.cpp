#include "cbayes/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "cbayes/special.hpp"

namespace cbayes {

double tv_distance_quadrature(const ScalarPdf& p, const ScalarPdf& q, Interval support, std::size_t nodes,
                              const std::vector<double>& breakpoints) {
    require(nodes >= 64, ErrorKind::Input, "TV quadrature needs at least 64 nodes");
    require(support.finite() && support.lower < support.upper, ErrorKind::Input,
            "TV quadrature needs a finite, nonempty support interval");
    const auto integrand = [&](double x) { return std::abs(p(x) - q(x)); };
    if (breakpoints.empty()) return trapezoid(integrand, support.lower, support.upper, nodes);
    return trapezoid_pieces(integrand, support.lower, support.upper, breakpoints, nodes);
}

double tv_distance_quadrature(const DensityModel& p, const DensityModel& q, std::optional<Interval> support,
                              std::size_t nodes) {
    if (p.dim() != 1 || q.dim() != 1) {
        fail(ErrorKind::Unsupported, "quadrature TV is 1-D only; use tv_distance_mc");
    }
    const Interval rp = p.support_range(0, 1e-10), rq = q.support_range(0, 1e-10);
    const Interval s = support.value_or(Interval{std::min(rp.lower, rq.lower), std::max(rp.upper, rq.upper)});
    if (nodes == 0) {
        nodes = 4001;
        for (const DensityModel* d : {&p, &q}) {
            if (const GaussianKde* k = d->as_kde()) {
                const double per_h = 8.0 * s.width() / k->bandwidth()[0];
                nodes = std::max(nodes, static_cast<std::size_t>(std::ceil(per_h)) + 1);
            }
        }
    }
    // Support ends are where bounded densities jump.
    const std::vector<double> cuts{rp.lower, rp.upper, rq.lower, rq.upper};
    return tv_distance_quadrature([&](double x) { return p.pdf(x); }, [&](double x) { return q.pdf(x); }, s, nodes,
                                  cuts);
}

double tv_distance_mc(const std::function<double(std::span<const double>)>& p,
                      const std::function<double(std::span<const double>)>& q, const DensityModel& sampler,
                      const Matrix& batch) {
    require(batch.rows() > 0, ErrorKind::Input, "Monte Carlo TV needs a nonempty batch");
    require(batch.cols() == sampler.dim(), ErrorKind::Input, "batch width does not match the sampler");
    double sum = 0.0;
    for (std::size_t i = 0; i < batch.rows(); ++i) {
        const auto x = batch.row(i);
        const double s = sampler.pdf(x);
        require(s > 0.0, ErrorKind::Input, "sampler density is zero at batch row " + std::to_string(i));
        sum += std::abs(p(x) - q(x)) / s;
    }
    return sum / static_cast<double>(batch.rows());
}

L1Error posterior_l1_error(const DensityModel& exact_pf, const DensityModel& approx_pf, const DensityModel& observed,
                           const Matrix& qois, double ratio_floor) {
    require(qois.rows() > 0, ErrorKind::Input, "L1 error needs at least one QoI row");
    L1Error out;
    double sum = 0.0;
    auto floored = [&](double v) {
        if (v <= ratio_floor) {
            ++out.violations;
            return ratio_floor;
        }
        return v;
    };
    for (std::size_t i = 0; i < qois.rows(); ++i) {
        const auto q = qois.row(i);
        const double obs = observed.pdf(q);
        if (obs == 0.0) continue;
        sum += std::abs(obs / floored(exact_pf.pdf(q)) - obs / floored(approx_pf.pdf(q)));
    }
    out.value = sum / static_cast<double>(qois.rows());
    return out;
}

double median(std::vector<double> values) {
    require(!values.empty(), ErrorKind::Input, "median of an empty list");
    const std::size_t n = values.size();
    std::sort(values.begin(), values.end());
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size(), ErrorKind::Input, "slope fit needs matched lists");
    require(x.size() >= 3, ErrorKind::Input, "slope fit needs at least 3 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] > 0.0 && y[i] > 0.0, ErrorKind::Input, "log-log fit needs positive values");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    const double n = static_cast<double>(x.size());
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    require(sxx > 0.0, ErrorKind::Input, "slope fit needs distinct sample sizes");
    return sxy / sxx;
}

double fit_rate(ConvergenceRecord& record) {
    for (std::size_t i = 1; i < record.sample_sizes.size(); ++i) {
        require(record.sample_sizes[i] > record.sample_sizes[i - 1], ErrorKind::Input,
                "sample sizes must be strictly increasing");
    }
    record.fitted_slope = fit_loglog_slope(record.sample_sizes, record.errors);
    return *record.fitted_slope;
}

nlohmann::json ConvergenceRecord::to_json() const {
    nlohmann::json j{{"d", dim},
                     {"m", qoi_count},
                     {"sample_sizes", sample_sizes},
                     {"median_errors", errors},
                     {"repetitions", repetitions}};
    j["fitted_slope"] = fitted_slope ? nlohmann::json(*fitted_slope) : nlohmann::json(nullptr);
    return j;
}

}  // namespace cbayes
