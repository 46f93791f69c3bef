#include "auditdesign/aon_design.hpp"

#include <algorithm>
#include <cmath>

#include "auditdesign/error.hpp"
#include "auditdesign/numerics.hpp"

namespace auditdesign {
namespace {

void check_pi(double pi) {
  if (!(pi >= 0.0 && pi <= 1.0)) throw ValidationError("error rate must lie in [0, 1]");
}

double roberts_value(const PopulationMoments& m, double pi) {
  const double n = static_cast<double>(m.n_pop);
  return pi * m.mu_x2 - (pi * m.mu_x) * (pi * m.mu_x) -
         pi * (1 - pi) * (m.sigma2_x + m.mu_x * m.mu_x) / n;
}

}  // namespace

VariancePrediction roberts_variance(const PopulationMoments& m, double pi) {
  check_pi(pi);
  VariancePrediction out;
  out.value = clamp_variance(roberts_value(m, pi), m.mu_x2);
  out.at_pi = pi;
  out.kind = VarianceKind::roberts;
  return out;
}

VariancePrediction total_variance(const PopulationMoments& m, double pi) {
  check_pi(pi);
  VariancePrediction out;
  out.value = clamp_variance(pi * m.mu_x2 - (pi * m.mu_x) * (pi * m.mu_x), m.mu_x2);
  out.at_pi = pi;
  out.kind = VarianceKind::total;
  out.expected_mean = pi * m.mu_x;
  return out;
}

PiCrit pi_crit(const PopulationMoments& m) {
  const double n = static_cast<double>(m.n_pop);
  PiCrit out;
  if (m.mu_x != 0) out.large_n_approx = m.mu_x2 / (2 * m.mu_x * m.mu_x);
  const double denom = m.mu_x * m.mu_x - m.mu_x2 / n;
  if (std::abs(denom) <= 1e-15 * std::max(m.mu_x2, 1e-300)) return out;
  const double value = 0.5 * (m.mu_x2 - m.mu_x2 / n) / denom;
  out.value = value;
  out.interior = value >= 0.0 && value <= 1.0;
  return out;
}

VariancePrediction conservative_variance_aon(const PopulationMoments& m) {
  // h(0) = 0 and h(1) = sigma^2; the interior stationary point when it exists.
  double best_pi = 0.0;
  double best = 0.0;
  const auto consider = [&](double pi) {
    const double v = roberts_value(m, pi);
    if (v > best + 1e-12 * std::max(std::abs(best), 1.0) ||
        (std::abs(v - best) <= 1e-12 * std::max(std::abs(best), 1.0) && pi < best_pi)) {
      best = std::max(v, best);
      best_pi = pi;
    }
  };
  const PiCrit crit = pi_crit(m);
  if (crit.value && crit.interior) consider(*crit.value);
  consider(1.0);

  VariancePrediction out = roberts_variance(m, best_pi);
  out.conservative = true;
  return out;
}

double achieved_margin(std::size_t population, double variance, std::size_t n, double confidence) {
  if (n == 0 || n > population) throw ValidationError("sample size must lie in [1, N]");
  if (population <= 1) return 0.0;
  const double big_n = static_cast<double>(population);
  const double small_n = static_cast<double>(n);
  const double var_total = big_n * big_n * variance / small_n * (big_n - small_n) / (big_n - 1);
  return two_sided_z(confidence) * std::sqrt(std::max(var_total, 0.0));
}

SampleSizePlan sample_size(const PopulationMoments& m, const VariancePrediction& variance,
                           double margin, double confidence, Estimator estimator) {
  if (!(margin > 0)) throw ValidationError("margin of error must be positive");
  if (!(confidence > 0.5 && confidence < 1.0)) {
    throw ValidationError("confidence must lie in (0.5, 1)");
  }
  if (!(variance.value >= 0)) throw ValidationError("variance must be nonnegative");

  const double big_n = static_cast<double>(m.n_pop);
  const double z = two_sided_z(confidence);
  const double zv = z * z * variance.value;

  SampleSizePlan plan;
  plan.margin = margin;
  plan.confidence = confidence;
  plan.estimator = estimator;
  plan.variance_used = variance;
  plan.unclamped =
      zv == 0 ? 0.0 : zv * big_n * big_n * big_n / (margin * margin * (big_n - 1) + zv * big_n * big_n);

  const double rounded = std::ceil(plan.unclamped);
  std::size_t n = rounded >= big_n ? m.n_pop : static_cast<std::size_t>(std::max(rounded, 0.0));
  n = std::min(std::max<std::size_t>(n, 2), m.n_pop);
  // Guard the ceiling against round-off in the closed form.
  while (n < m.n_pop && achieved_margin(m.n_pop, variance.value, n, confidence) > margin) ++n;
  plan.n = n;
  plan.census_required = m.n_pop >= 2 && n == m.n_pop && rounded >= big_n;
  return plan;
}

}  // namespace auditdesign
