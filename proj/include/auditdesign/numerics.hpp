#pragma once

#include <vector>

namespace auditdesign {

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse of normal_cdf on (0, 1): Acklam's rational approximation followed
/// by one Halley step. Throws ValidationError outside (0, 1).
double normal_quantile(double p);

/// Two-sided critical value z_{(1+confidence)/2}.
double two_sided_z(double confidence);

struct CubicRealRoots {
  std::vector<double> roots;      // ascending, distinct
  std::vector<double> residuals;  // |p(root)|, same order
};

/// All real roots of a3 x^3 + a2 x^2 + a1 x + a0. A vanishing leading
/// coefficient falls back to the quadratic or linear case. Throws
/// ValidationError for the identically zero polynomial.
CubicRealRoots solve_cubic_real_roots(double a3, double a2, double a1, double a0);

}  // namespace auditdesign
