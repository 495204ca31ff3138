#include "ciropt/student_t.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ciropt/error.hpp"

namespace ciropt {

namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 100000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw InvalidInput("incomplete_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput("incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

namespace {

// Halley iteration for I_x(a, b) = p from x, safeguarded by a bisection bracket.
double refine_inverse_beta(double a, double b, double p, double x) {
  const double afac = -log_beta(a, b);
  double lo = 0.0;
  double hi = 1.0;
  x = std::clamp(x, 1e-300, 1.0 - 1e-16);
  for (int j = 0; j < 300; ++j) {
    const double err = incomplete_beta(a, b, x) - p;
    if (err == 0.0) break;
    if (err < 0.0)
      lo = x;
    else
      hi = x;
    const double density = std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) + afac);
    double next = 0.5 * (lo + hi);
    if (density > 0.0 && std::isfinite(density)) {
      const double u = err / density;
      const double curvature = std::clamp(u * ((a - 1.0) / x - (b - 1.0) / (1.0 - x)), -1.0, 1.0);
      const double candidate = x - u / (1.0 - 0.5 * curvature);
      if (candidate > lo && candidate < hi) next = candidate;
    }
    const double step = std::abs(next - x);
    x = next;
    if (step <= 1e-15 * x || hi - lo <= 1e-15 * hi) break;
  }
  return std::clamp(x, 0.0, 1.0);
}

}  // namespace

double inverse_incomplete_beta(double a, double b, double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  double x;
  if (a >= 1.0 && b >= 1.0) {
    const double pp = p < 0.5 ? p : 1.0 - p;
    const double t = std::sqrt(-2.0 * std::log(pp));
    double z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t;
    if (p < 0.5) z = -z;
    const double al = (z * z - 3.0) / 6.0;
    const double h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
    const double w = (z * std::sqrt(al + h) / h) -
                     (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
    x = a / (a + b * std::exp(2.0 * w));
  } else {
    const double lna = std::log(a / (a + b));
    const double lnb = std::log(b / (a + b));
    const double t = std::exp(a * lna) / a;
    const double u = std::exp(b * lnb) / b;
    const double w = t + u;
    x = p < t / w ? std::pow(a * w * p, 1.0 / a) : 1.0 - std::pow(b * w * (1.0 - p), 1.0 / b);
  }
  // Near 1 the grid of doubles is coarse; solve I_{1-x}(b, a) = 1 - p instead.
  if (x > 0.5) return 1.0 - refine_inverse_beta(b, a, 1.0 - p, 1.0 - x);
  return refine_inverse_beta(a, b, p, x);
}

double student_t_pdf(double t, double nu) {
  const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi);
  return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(t * t / nu));
}

double student_t_cdf(double t, double nu) {
  if (!(nu > 0.0)) throw InvalidInput("student_t_cdf: nu must be positive");
  if (t == 0.0) return 0.5;
  const double tail = 0.5 * incomplete_beta(0.5 * nu, 0.5, nu / (nu + t * t));
  return t > 0.0 ? 1.0 - tail : tail;
}

double t_quantile(double p, double nu) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("t_quantile: p must lie in (0, 1)");
  if (!(nu > 0.0)) throw InvalidInput("t_quantile: nu must be positive");
  if (p == 0.5) return 0.0;
  const bool upper = p > 0.5;
  const double tail = upper ? 1.0 - p : p;

  // two-sided tail probability 2*tail = I_x(nu/2, 1/2) with x = nu / (nu + t^2)
  const double x = inverse_incomplete_beta(0.5 * nu, 0.5, 2.0 * tail);
  double t = x > 0.0 ? std::sqrt(nu * (1.0 - x) / x) : std::numeric_limits<double>::max();
  if (!std::isfinite(t)) t = 1e6;

  // Newton on the upper-tail equation, safeguarded by a bracket
  double lo = 0.0;
  double hi = std::max(2.0 * t, 1.0);
  while (1.0 - student_t_cdf(hi, nu) > tail && hi < 1e300) hi *= 2.0;
  t = std::clamp(t, lo, hi);
  for (int it = 0; it < 100; ++it) {
    const double f = (1.0 - student_t_cdf(t, nu)) - tail;  // decreasing in t
    if (f > 0.0)
      lo = t;
    else
      hi = t;
    const double slope = -student_t_pdf(t, nu);
    double next = slope != 0.0 ? t - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-13 * std::max(1.0, std::abs(t))) {
      t = next;
      break;
    }
    t = next;
  }
  return upper ? t : -t;
}

}  // namespace ciropt
