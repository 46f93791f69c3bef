#include "auditdesign/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "auditdesign/error.hpp"

namespace auditdesign {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

// Acklam (2003), lower tail only; relative error about 1.15e-9 before refinement.
double acklam_lower(double p) {
  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                           -2.759285104469687e+02, 1.383577518672690e+02,
                                           -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                           -1.556989798598866e+02, 6.680131188771972e+01,
                                           -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                           -2.400758277161838e+00, -2.549732539343734e+00,
                                           4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                           2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

double quantile_lower(double p) {
  double x = acklam_lower(p);
  // Halley step on Phi(x) - p.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
  x -= u / (1 + x * u / 2);
  return x;
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("normal_quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -quantile_lower(1.0 - p);
  return quantile_lower(p);
}

double two_sided_z(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ValidationError("confidence must lie in (0, 1)");
  }
  return normal_quantile(0.5 + confidence / 2);
}

namespace {

double eval_cubic(double a3, double a2, double a1, double a0, double x) {
  return ((a3 * x + a2) * x + a1) * x + a0;
}

double polish(double a3, double a2, double a1, double a0, double x) {
  for (int iter = 0; iter < 2; ++iter) {
    const double fx = eval_cubic(a3, a2, a1, a0, x);
    const double dfx = (3 * a3 * x + 2 * a2) * x + a1;
    if (fx == 0 || dfx == 0) break;
    const double next = x - fx / dfx;
    if (!std::isfinite(next)) break;
    if (std::abs(eval_cubic(a3, a2, a1, a0, next)) >= std::abs(fx)) break;
    x = next;
  }
  return x;
}

std::vector<double> quadratic_roots(double a, double b, double c) {
  if (a == 0) {
    if (b == 0) return {};
    return {-c / b};
  }
  const double disc = b * b - 4 * a * c;
  const double scale = std::max({b * b, std::abs(4 * a * c), 1e-300});
  if (disc < -1e-14 * scale) return {};
  if (disc <= 1e-14 * scale) return {-b / (2 * a)};
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  std::vector<double> r{q / a};
  if (q != 0) r.push_back(c / q);
  else r.push_back(0.0);
  return r;
}

std::vector<double> monic_cubic_roots(double a, double b, double c) {
  // x^3 + a x^2 + b x + c, Q/R form.
  const double q = (a * a - 3 * b) / 9;
  const double r = (a * (2 * a * a - 9 * b) + 27 * c) / 54;
  const double q3 = q * q * q;
  const double r2 = r * r;
  if (r2 < q3) {
    const double t = std::acos(std::clamp(r / std::sqrt(q3), -1.0, 1.0));
    const double m = -2 * std::sqrt(q);
    return {m * std::cos(t / 3) - a / 3,
            m * std::cos((t + 2 * std::numbers::pi) / 3) - a / 3,
            m * std::cos((t - 2 * std::numbers::pi) / 3) - a / 3};
  }
  if (r2 - q3 <= 1e-10 * std::max(r2, std::abs(q3))) {
    // Discriminant zero up to round-off: a double (or triple) root.
    const double cr = std::cbrt(r);
    return {-2 * cr - a / 3, cr - a / 3};
  }
  const double big_a = -std::copysign(std::cbrt(std::abs(r) + std::sqrt(r2 - q3)), r);
  const double big_b = big_a == 0 ? 0 : q / big_a;
  std::vector<double> roots{(big_a + big_b) - a / 3};
  // The complex pair collapses to a real double root when A == B.
  const double imag = std::sqrt(3.0) / 2 * (big_a - big_b);
  if (std::abs(imag) <= 1e-10 * std::max(1.0, std::abs(big_a))) {
    roots.push_back(-0.5 * (big_a + big_b) - a / 3);
  }
  return roots;
}

}  // namespace

CubicRealRoots solve_cubic_real_roots(double a3, double a2, double a1, double a0) {
  const double scale = std::max({std::abs(a3), std::abs(a2), std::abs(a1), std::abs(a0)});
  if (scale == 0) throw ValidationError("identically zero polynomial");

  std::vector<double> candidates;
  // A leading coefficient this small only produces roots beyond 1e14 * scale.
  if (std::abs(a3) <= 1e-14 * scale) {
    a3 = 0;
    candidates = quadratic_roots(a2, a1, a0);
  } else {
    candidates = monic_cubic_roots(a2 / a3, a1 / a3, a0 / a3);
  }

  for (double& x : candidates) x = polish(a3, a2, a1, a0, x);
  std::sort(candidates.begin(), candidates.end());

  CubicRealRoots out;
  for (double x : candidates) {
    if (!std::isfinite(x)) continue;
    if (!out.roots.empty() && std::abs(x - out.roots.back()) <= 1e-9 * std::max(1.0, std::abs(x))) {
      continue;
    }
    out.roots.push_back(x);
    out.residuals.push_back(std::abs(eval_cubic(a3, a2, a1, a0, x)));
  }
  return out;
}

}  // namespace auditdesign
