#pragma once

#include <array>
#include <string_view>
#include <utility>
#include <vector>

namespace auditdesign {

/// Coefficients of the expected-variance surface
///   s(pi, pl) = c1 pi + c2 (1-pi) pl^2 + c3 (1-pi) pl (1-pl) + c4 pi^2
///             + c5 pi (1-pi) pl + c6 (1-pi)^2 pl^2.
/// E(sigma_y^2) has this form directly; E(sigma_R^2) maps onto it with
/// (c1..c6) = (a1, a2, a3, -a1, a4, a5).
struct SurfaceCoefficients {
  double c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0, c6 = 0;

  double scale() const;
};

double evaluate(const SurfaceCoefficients& c, double pi, double pi_l);

struct SurfaceGradient {
  double d_pi = 0;
  double d_pi_l = 0;
};

SurfaceGradient gradient(const SurfaceCoefficients& c, double pi, double pi_l);

/// Coefficients (cubic, quadratic, linear, constant) of the polynomial in pl
/// whose roots are the pl-coordinates of interior stationary points:
///   -2 c6 (c2 - c3) pl^3 + 3 c5 (c2 - c3) pl^2
///   + (-4 c* c4 + c3 c5 + c5^2 - 2 c1 c6) pl - 2 c3 c4 + c1 c5,
/// with c* = c2 - c3 + c6.
std::array<double, 4> stationary_cubic(const SurfaceCoefficients& c);

enum class SurfaceEdge { pi_zero, pi_one, pi_l_zero, pi_l_one };

std::string_view to_string(SurfaceEdge edge);

struct EdgeMaximum {
  SurfaceEdge edge = SurfaceEdge::pi_zero;
  double value = 0;
  double pi = 0;
  double pi_l = 0;
};

struct InteriorCandidate {
  double pi_l = 0;
  double pi = 0;      // NaN when no pi could be recovered
  double value = 0;   // surface value at (pi, pi_l); NaN if pi is NaN
  bool admitted = false;
  std::string_view reason;  // why it was rejected, "" when admitted
};

struct SurfaceMaximum {
  double value = 0;
  double pi = 0;
  double pi_l = 0;
  bool interior = false;
  std::array<EdgeMaximum, 4> edges;           // pi=0, pi=1, pl=0, pl=1
  std::vector<InteriorCandidate> candidates;  // every real root of the cubic
  bool degenerate_cubic = false;              // cubic vanished identically
  std::vector<std::pair<double, double>> argmaxes;  // (pi, pl) within 1e-12
};

/// Global maximum of the surface over [0,1]^2: interior stationary points
/// from the cubic (pi back-solved from the pi-partial, admitted only when both
/// partials vanish and the Hessian is negative semidefinite) and closed-form
/// maxima of the four edge quadratics. Ties go to the smaller pi, then the
/// smaller pl.
SurfaceMaximum maximize(const SurfaceCoefficients& c);

}  // namespace auditdesign
