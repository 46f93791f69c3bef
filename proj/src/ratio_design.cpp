#include "auditdesign/ratio_design.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "auditdesign/error.hpp"
#include "auditdesign/numerics.hpp"
#include "auditdesign/rng.hpp"

namespace auditdesign {
namespace {

void check_open_pi(double pi) {
  if (!(pi >= 0.0 && pi <= 1.0)) throw ValidationError("error rate must lie in [0, 1]");
}

long double ld(Int128 v) { return static_cast<long double>(v); }

// Integer weights w_i with sign(g(U)) = sign(sum_i U_i w_i): multiplying c_i
// by 2 N S (S = sum X, S2 = sum X^2, in cents) gives
//   w_i = X_i (2 N S X_i - S^2 - N S2).
std::vector<Int128> sign_weights(const ClaimPopulation& pop) {
  const ClaimSums s = accumulate_sums(pop);
  const auto n = static_cast<Int128>(s.count);
  std::vector<Int128> w;
  w.reserve(pop.size());
  for (const auto& claim : pop.claims()) {
    const Int128 x = claim.total().value;
    w.push_back(x * (2 * n * s.x * x - s.x * s.x - n * s.x2));
  }
  return w;
}

}  // namespace

PreferenceReport preference_probability(const DistinctValueGroups& groups,
                                        const PopulationMoments& m, double pi) {
  check_open_pi(pi);
  if (m.mu_x <= 0) throw ValidationError("mean claim amount must be positive");
  PreferenceReport r;
  r.method = PreferenceMethod::normal_approx;
  r.min_group_count = groups.min_count();
  r.distinct_values = groups.groups.size();

  long double sum_c2 = 0;
  for (const auto& g : groups.groups) {
    sum_c2 += static_cast<long double>(g.count) * g.c_value * g.c_value;
  }
  const double n = static_cast<double>(m.n_pop);
  r.mean_g = pi * m.sigma2_x / 2;
  r.var_g = static_cast<double>(pi * (1 - pi) * sum_c2 / (n * n));

  if (pi == 0.0 || pi == 1.0) {
    r.degenerate = true;
    r.prob_ratio_better = (pi == 0.0 || m.sigma2_x == 0) ? 0.5 : 1.0;
    return r;
  }
  if (r.var_g <= 0) {
    r.prob_ratio_better = r.mean_g > 0 ? 1.0 : 0.5;
    return r;
  }
  r.prob_ratio_better = normal_cdf(r.mean_g / std::sqrt(r.var_g));
  return r;
}

PreferenceReport preference_probability_exact(const ClaimPopulation& pop, double pi,
                                              const PreferenceMode& mode) {
  check_open_pi(pi);
  const auto m = compute_moments(pop);
  const auto groups = distinct_value_groups(pop);
  // Mean and variance of g are exact for any method.
  PreferenceReport r = preference_probability(groups, m, pi);
  r.degenerate = false;
  const std::vector<Int128> w = sign_weights(pop);
  const std::size_t n = pop.size();

  if (std::holds_alternative<Exhaustive>(mode)) {
    if (n > 20) throw ValidationError("exhaustive enumeration supports at most 20 claims");
    r.method = PreferenceMethod::exhaustive;
    long double prob = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      Int128 total = 0;
      long double weight = 1;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) {
          total += w[i];
          weight *= pi;
        } else {
          weight *= 1 - pi;
        }
      }
      if (total > 0) prob += weight;
    }
    r.prob_ratio_better = static_cast<double>(prob);
    return r;
  }

  const auto& mc = std::get<MonteCarlo>(mode);
  if (mc.replicates == 0) throw ValidationError("Monte Carlo needs at least one replicate");
  r.method = PreferenceMethod::monte_carlo;
  std::vector<unsigned char> positive(mc.replicates, 0);
  const auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t rep = begin; rep < end; ++rep) {
      CounterRng rng(stream_seed(mc.seed, rep));
      Int128 total = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (rng.uniform() < pi) total += w[i];
      }
      positive[rep] = total > 0;
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(mc.workers, 1, mc.replicates);
  if (workers == 1) {
    run_range(0, mc.replicates);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < workers; ++t) {
      threads.emplace_back(run_range, t * mc.replicates / workers, (t + 1) * mc.replicates / workers);
    }
    for (auto& th : threads) th.join();
  }
  std::size_t hits = 0;
  for (unsigned char p : positive) hits += p;
  const double reps = static_cast<double>(mc.replicates);
  const double p_hat = static_cast<double>(hits) / reps;
  r.prob_ratio_better = p_hat;
  r.mc_std_err = std::sqrt(p_hat * (1 - p_hat) / reps);
  return r;
}

VariancePrediction roberts_ratio_variance(const PopulationMoments& m, double pi) {
  check_open_pi(pi);
  if (m.mu_x <= 0) throw ValidationError("mean claim amount must be positive");
  const double n = static_cast<double>(m.n_pop);
  const double mu2 = m.mu_x * m.mu_x;
  const double cv2 = m.sigma2_x / mu2;
  // G1 / ((mu/sigma)(1 + mu^2/sigma^2)) = G1 sigma^3 / (mu (mu^2 + sigma^2)); 0 when sigma = 0.
  const double sigma = m.sigma_x();
  const double skew_term =
      sigma > 0 ? m.g1_skew * sigma * sigma * sigma / (m.mu_x * (mu2 + m.sigma2_x)) : 0.0;
  const double bracket = 1 + (cv2 + 4 / (1 + cv2) - skew_term - 5) / n;

  VariancePrediction out;
  out.value = clamp_variance(pi * (1 - pi) * m.mu_x2 * bracket, m.mu_x2);
  out.at_pi = pi;
  out.kind = VarianceKind::roberts_ratio;
  out.large_n_form = pi * (1 - pi) * m.mu_x2;
  return out;
}

double zero_error_pi_bound(std::size_t n, double confidence) {
  if (n == 0) throw ValidationError("sample size must be at least 1");
  if (!(confidence > 0.5 && confidence < 1.0)) {
    throw ValidationError("confidence must lie in (0.5, 1)");
  }
  return -std::expm1(std::log1p(-confidence) / static_cast<double>(n));
}

PartialRCoefficients partial_r_coefficients(const ClaimSums& s) {
  if (s.count == 0) throw ValidationError("empty population");
  if (s.x <= 0) throw ValidationError("total claimed amount must be positive");
  // Work in cents; a_j carry cents^2 until the final conversion. k_i is
  // dimensionless: k_i = -2 X_i / tau + kappa, kappa = tau2 / tau^2.
  const long double n = static_cast<long double>(s.count);
  const long double tau = ld(s.x);
  const long double kappa = ld(s.x2) / (tau * tau);
  const long double t_tot = ld(s.t);

  const auto one_plus_k_sum = [&](Int128 plain, Int128 with_x) {
    return (1 + kappa) * ld(plain) - 2 * ld(with_x) / tau;
  };
  const long double sum_k_x = -2 * ld(s.x2) / tau + kappa * tau;
  const long double sum_k_t = -2 * ld(s.xt) / tau + kappa * t_tot;
  const long double sum_k_xt = -2 * ld(s.x2t) / tau + kappa * ld(s.xt);
  const long double sum_k_t2 = -2 * ld(s.xt2) / tau + kappa * ld(s.t2);

  constexpr long double kCents2 = 1e4L;
  PartialRCoefficients a;
  a.a1 = static_cast<double>(one_plus_k_sum(s.x2, s.x3) / n / kCents2);
  a.a2 = static_cast<double>(one_plus_k_sum(s.t2, s.xt2) / n / kCents2);
  a.a3 = static_cast<double>(one_plus_k_sum(s.l2, s.xl2) / n / kCents2);
  // sum_i k_i Xt_i (tau - X_i) + sum_i k_i X_i (T - Xt_i)
  a.a4 = static_cast<double>((tau * sum_k_t + t_tot * sum_k_x - 2 * sum_k_xt) / n / kCents2);
  // sum_i k_i Xt_i (T - Xt_i)
  a.a5 = static_cast<double>((t_tot * sum_k_t - sum_k_t2) / n / kCents2);
  return a;
}

PartialRCoefficients partial_r_coefficients(const ClaimPopulation& pop) {
  const ClaimSums s = accumulate_sums(pop);
  PartialRCoefficients a = partial_r_coefficients(s);
  const long double tau = ld(s.x);
  const long double kappa = ld(s.x2) / (tau * tau);
  a.k.reserve(pop.size());
  for (const auto& claim : pop.claims()) {
    a.k.push_back(static_cast<double>(-2 * static_cast<long double>(claim.total().value) / tau + kappa));
  }
  return a;
}

VariancePrediction expected_var_r(const PartialRCoefficients& coef, double pi, double pi_l) {
  validate(LineItemModel{pi, pi_l});
  VariancePrediction out;
  out.value = clamp_variance(evaluate(coef.surface(), pi, pi_l), coef.surface().scale());
  out.at_pi = pi;
  out.at_pi_l = pi_l;
  out.kind = VarianceKind::partial_r;
  return out;
}

ConservativeSurface conservative_variance_ratio(const PartialRCoefficients& coef) {
  ConservativeSurface out;
  out.surface = maximize(coef.surface());
  out.prediction.value = clamp_variance(out.surface.value, coef.surface().scale());
  out.prediction.at_pi = out.surface.pi;
  out.prediction.at_pi_l = out.surface.pi_l;
  out.prediction.kind = VarianceKind::partial_r;
  out.prediction.conservative = true;
  return out;
}

VariancePrediction conservative_ratio_variance_aon(const PopulationMoments& m) {
  VariancePrediction out = roberts_ratio_variance(m, 0.5);
  out.conservative = true;
  return out;
}

}  // namespace auditdesign
