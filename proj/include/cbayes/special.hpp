#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace cbayes {

/// log Gamma(x) for x > 0 (Lanczos, g = 7). Reentrant, unlike std::lgamma.
double log_gamma(double x);

/// Regularized lower incomplete gamma P(a, x). Series below x = a + 1,
/// Lentz continued fraction for Q(a, x) above.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

double chi2_pdf(double dof, double q);
double chi2_log_pdf(double dof, double q);
double chi2_cdf(double dof, double q);
/// Bracketing bisection on chi2_cdf; |chi2_cdf(d, result) - p| <= 1e-9.
double chi2_quantile(double dof, double p);

double normal_pdf(double x, double mean = 0.0, double stddev = 1.0);
double normal_cdf(double x, double mean = 0.0, double stddev = 1.0);
double normal_quantile(double p);

double beta_log_norm(double alpha, double beta);

/// Composite trapezoid rule with `nodes` equally spaced nodes on [a, b].
double trapezoid(const std::function<double(double)>& f, double a, double b, std::size_t nodes);
/// Trapezoid rule applied separately on each piece of [a, b] cut at the given
/// breakpoints (those outside [a, b] are ignored), with about `nodes` nodes in
/// total. Piece ends use one-sided limits, so jumps in f at the breakpoints
/// cost no accuracy.
double trapezoid_pieces(const std::function<double(double)>& f, double a, double b, std::vector<double> breakpoints,
                        std::size_t nodes);

}  // namespace cbayes
