#pragma once

namespace ciropt {

/// Regularised incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Inverse of I_x(a, b) in x.
double inverse_incomplete_beta(double a, double b, double p);

double student_t_cdf(double t, double nu);
double student_t_pdf(double t, double nu);

/// Inverse CDF of Student's t with nu degrees of freedom (nu may be fractional).
/// Absolute accuracy is well below 1e-6 for p in (1e-12, 1 - 1e-12).
double t_quantile(double p, double nu);

}  // namespace ciropt
