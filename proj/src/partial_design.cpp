#include "auditdesign/partial_design.hpp"

#include <cmath>

#include "auditdesign/error.hpp"

namespace auditdesign {
namespace {

constexpr long double kCents2 = 1e4L;

long double ld(Int128 v) { return static_cast<long double>(v); }

void check_rates(double pi, double pi_l) { validate(LineItemModel{pi, pi_l}); }

}  // namespace

PartialYCoefficients partial_y_coefficients(const ClaimSums& s) {
  if (s.count == 0) throw ValidationError("empty population");
  const long double n = static_cast<long double>(s.count);
  const long double diag = (1 / n - 1 / (n * n)) / kCents2;
  const long double pair = 1 / (n * n) / kCents2;
  PartialYCoefficients c;
  c.c1 = static_cast<double>(diag * ld(s.x2));
  c.c2 = static_cast<double>(diag * ld(s.t2));
  c.c3 = static_cast<double>(diag * ld(s.l2));
  // sum_{i != i'} A_i B_i' = (sum A)(sum B) - sum A_i B_i, exact in integers.
  c.c4 = static_cast<double>(-pair * ld(s.x * s.x - s.x2));
  c.c5 = static_cast<double>(-pair * ld(2 * (s.x * s.t - s.xt)));
  c.c6 = static_cast<double>(-pair * ld(s.t * s.t - s.t2));
  return c;
}

PartialYCoefficients partial_y_coefficients(const ClaimPopulation& pop) {
  return partial_y_coefficients(accumulate_sums(pop));
}

VariancePrediction expected_var_y(const PartialYCoefficients& coef, double pi, double pi_l) {
  check_rates(pi, pi_l);
  VariancePrediction out;
  out.value = clamp_variance(evaluate(coef.surface(), pi, pi_l), coef.surface().scale());
  out.at_pi = pi;
  out.at_pi_l = pi_l;
  out.kind = VarianceKind::partial_y;
  return out;
}

ConservativeSurface conservative_variance_partial(const PartialYCoefficients& coef,
                                                  const PopulationMoments& m) {
  ConservativeSurface out;
  out.surface = maximize(coef.surface());
  out.prediction.value = clamp_variance(out.surface.value, m.mu_x2);
  out.prediction.at_pi = out.surface.pi;
  out.prediction.at_pi_l = out.surface.pi_l;
  out.prediction.kind = VarianceKind::partial_y;
  out.prediction.conservative = true;
  return out;
}

VariancePrediction expected_var_y_aon_lines(const ClaimPopulation& pop, double pi, double pi_l) {
  check_rates(pi, pi_l);
  long double sum_x = 0;
  long double sum_x2 = 0;
  long double sum_line2 = 0;
  for (const auto& claim : pop.claims()) {
    for (const auto& line : claim.lines) {
      if (line.probable_error != line.claimed) {
        throw ValidationError("claim '" + claim.id + "' has a line that is not all-or-nothing");
      }
      const long double v = line.claimed.value / 100.0L;
      sum_line2 += v * v;
    }
    const long double x = claim.total().value / 100.0L;
    sum_x += x;
    sum_x2 += x * x;
  }
  const long double n = static_cast<long double>(pop.size());
  const long double p = pi;
  const long double q = pi_l;
  const long double effective = p + (1 - p) * q;
  const long double value =
      (1 / n - 1 / (n * n)) * ((p + (1 - p) * q * q) * sum_x2 + (1 - p) * q * (1 - q) * sum_line2) -
      effective * effective * (sum_x * sum_x - sum_x2) / (n * n);

  VariancePrediction out;
  out.value = clamp_variance(static_cast<double>(value), static_cast<double>(sum_x2 / n));
  out.at_pi = pi;
  out.at_pi_l = pi_l;
  out.kind = VarianceKind::partial_y;
  return out;
}

}  // namespace auditdesign
