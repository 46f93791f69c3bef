#include "auditdesign/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "auditdesign/numerics.hpp"

namespace auditdesign {

double SurfaceCoefficients::scale() const {
  return std::max({std::abs(c1), std::abs(c2), std::abs(c3), std::abs(c4), std::abs(c5),
                   std::abs(c6)});
}

double evaluate(const SurfaceCoefficients& c, double pi, double pl) {
  const double q = 1 - pi;
  return c.c1 * pi + c.c2 * q * pl * pl + c.c3 * q * pl * (1 - pl) + c.c4 * pi * pi +
         c.c5 * pi * q * pl + c.c6 * q * q * pl * pl;
}

SurfaceGradient gradient(const SurfaceCoefficients& c, double pi, double pl) {
  SurfaceGradient g;
  g.d_pi = c.c1 - c.c2 * pl * pl - c.c3 * pl * (1 - pl) + 2 * c.c4 * pi +
           c.c5 * (1 - 2 * pi) * pl - 2 * c.c6 * (1 - pi) * pl * pl;
  g.d_pi_l = (1 - pi) * (2 * c.c2 * pl + c.c3 * (1 - 2 * pl) + c.c5 * pi +
                         2 * c.c6 * (1 - pi) * pl);
  return g;
}

std::array<double, 4> stationary_cubic(const SurfaceCoefficients& c) {
  const double c_star = c.c2 - c.c3 + c.c6;
  return {-2 * c.c6 * (c.c2 - c.c3), 3 * c.c5 * (c.c2 - c.c3),
          -4 * c_star * c.c4 + c.c3 * c.c5 + c.c5 * c.c5 - 2 * c.c1 * c.c6,
          -2 * c.c3 * c.c4 + c.c1 * c.c5};
}

std::string_view to_string(SurfaceEdge edge) {
  switch (edge) {
    case SurfaceEdge::pi_zero: return "pi=0";
    case SurfaceEdge::pi_one: return "pi=1";
    case SurfaceEdge::pi_l_zero: return "pi_l=0";
    case SurfaceEdge::pi_l_one: return "pi_l=1";
  }
  return "?";
}

namespace {

constexpr double kTie = 1e-12;

bool within_tie(double a, double b) { return std::abs(a - b) <= kTie * std::max(1.0, std::abs(b)); }

// Maximizer of a t^2 + b t + k over [0, 1], smallest t on ties.
std::pair<double, double> max_quadratic(double a, double b, double k) {
  std::vector<double> ts{0.0, 1.0};
  if (a < 0) {
    const double vertex = -b / (2 * a);
    if (vertex > 0 && vertex < 1) ts.push_back(vertex);
  }
  std::sort(ts.begin(), ts.end());
  double best_t = ts.front();
  double best = (a * best_t + b) * best_t + k;
  for (double t : ts) {
    const double v = (a * t + b) * t + k;
    if (v > best && !within_tie(v, best)) {
      best = v;
      best_t = t;
    }
  }
  return {best_t, best};
}

struct Hessian {
  double pp, pq, qq;
};

Hessian hessian(const SurfaceCoefficients& c, double pi, double pl) {
  return {2 * c.c4 - 2 * c.c5 * pl + 2 * c.c6 * pl * pl,
          -2 * c.c2 * pl - c.c3 * (1 - 2 * pl) + c.c5 * (1 - 2 * pi) - 4 * c.c6 * (1 - pi) * pl,
          2 * (1 - pi) * (c.c2 - c.c3 + c.c6 * (1 - pi))};
}

// Recovers pi for a stationary pl from the pi-partial (linear in pi), falling
// back to the bracket of the pl-partial when the pi coefficient vanishes.
double back_solve_pi(const SurfaceCoefficients& c, double pl, double tiny) {
  const double d = 2 * c.c4 - 2 * c.c5 * pl + 2 * c.c6 * pl * pl;
  const double e = c.c1 - c.c2 * pl * pl - c.c3 * pl * (1 - pl) + c.c5 * pl - 2 * c.c6 * pl * pl;
  if (std::abs(d) > tiny) return -e / d;
  const double slope = c.c5 - 2 * c.c6 * pl;
  const double intercept = 2 * (c.c2 - c.c3 + c.c6) * pl + c.c3;
  if (std::abs(slope) > tiny) return -intercept / slope;
  // Both linear coefficients vanish: every pi is stationary iff both
  // constants vanish too; any representative will do.
  if (std::abs(e) <= tiny && std::abs(intercept) <= tiny) return 0.5;
  return std::numeric_limits<double>::quiet_NaN();
}

InteriorCandidate assess(const SurfaceCoefficients& c, double pl) {
  const double scale = std::max(c.scale(), 1e-300);
  const double tiny = 1e-12 * scale;
  InteriorCandidate cand;
  cand.pi_l = pl;
  cand.pi = back_solve_pi(c, pl, tiny);
  cand.value = std::isnan(cand.pi) ? std::numeric_limits<double>::quiet_NaN()
                                   : evaluate(c, cand.pi, pl);
  if (!(pl > 0 && pl < 1)) {
    cand.reason = "pi_l outside (0,1)";
  } else if (std::isnan(cand.pi)) {
    cand.reason = "no pi solves the system";
  } else if (!(cand.pi > 0 && cand.pi < 1)) {
    cand.reason = "pi outside (0,1)";
  } else {
    const auto g = gradient(c, cand.pi, pl);
    const auto h = hessian(c, cand.pi, pl);
    const double tol = 1e-8 * scale;
    if (std::abs(g.d_pi) > tol || std::abs(g.d_pi_l) > tol) {
      cand.reason = "partials do not vanish";
    } else if (h.pp > tol || h.qq > tol || h.pp * h.qq - h.pq * h.pq < -tol * tol) {
      cand.reason = "not a local maximum";
    } else {
      cand.admitted = true;
    }
  }
  return cand;
}

}  // namespace

SurfaceMaximum maximize(const SurfaceCoefficients& c) {
  SurfaceMaximum out;

  // Edges; each is a constant or a quadratic in the free coordinate.
  {
    const auto [t, v] = max_quadratic(c.c2 - c.c3 + c.c6, c.c3, 0.0);
    out.edges[0] = {SurfaceEdge::pi_zero, v, 0.0, t};
  }
  out.edges[1] = {SurfaceEdge::pi_one, c.c1 + c.c4, 1.0, 0.0};
  {
    const auto [t, v] = max_quadratic(c.c4, c.c1, 0.0);
    out.edges[2] = {SurfaceEdge::pi_l_zero, v, t, 0.0};
  }
  {
    const auto [t, v] =
        max_quadratic(c.c4 - c.c5 + c.c6, c.c1 - c.c2 + c.c5 - 2 * c.c6, c.c2 + c.c6);
    out.edges[3] = {SurfaceEdge::pi_l_one, v, t, 1.0};
  }

  // Interior stationary points.
  const auto cubic = stationary_cubic(c);
  const double cubic_scale =
      std::max({std::abs(cubic[0]), std::abs(cubic[1]), std::abs(cubic[2]), std::abs(cubic[3])});
  const double coef_scale = c.scale();
  if (cubic_scale <= 1e-13 * coef_scale * coef_scale) {
    // The partials share a factor and stationary points form curves; the
    // surface is constant along each, so sampling pl locates their values.
    out.degenerate_cubic = true;
    for (int k = 1; k < 100; ++k) {
      auto cand = assess(c, k / 100.0);
      if (cand.admitted) out.candidates.push_back(cand);
    }
  } else {
    const auto roots = solve_cubic_real_roots(cubic[0], cubic[1], cubic[2], cubic[3]);
    for (double pl : roots.roots) out.candidates.push_back(assess(c, pl));
  }

  struct Point {
    double value, pi, pl;
    bool interior;
  };
  std::vector<Point> points;
  for (const auto& e : out.edges) points.push_back({e.value, e.pi, e.pi_l, false});
  for (const auto& cand : out.candidates) {
    if (cand.admitted) points.push_back({cand.value, cand.pi, cand.pi_l, true});
  }

  double best = points.front().value;
  for (const auto& p : points) best = std::max(best, p.value);
  std::vector<Point> ties;
  for (const auto& p : points) {
    if (within_tie(p.value, best)) ties.push_back(p);
  }
  std::sort(ties.begin(), ties.end(), [](const Point& a, const Point& b) {
    return a.pi != b.pi ? a.pi < b.pi : a.pl < b.pl;
  });
  out.value = best;
  out.pi = ties.front().pi;
  out.pi_l = ties.front().pl;
  out.interior = ties.front().interior;
  for (const auto& p : ties) {
    if (out.argmaxes.empty() || out.argmaxes.back() != std::make_pair(p.pi, p.pl)) {
      out.argmaxes.emplace_back(p.pi, p.pl);
    }
  }
  return out;
}

}  // namespace auditdesign
