#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "auditdesign/model.hpp"
#include "auditdesign/partial_design.hpp"
#include "auditdesign/population.hpp"
#include "auditdesign/surface.hpp"

namespace auditdesign {

enum class PreferenceMethod { normal_approx, monte_carlo, exhaustive };

/// Confidence that the ratio estimator beats simple expansion, i.e.
/// P(g(U) > 0) with g(U) = (1/N) sum c_i U_i.
struct PreferenceReport {
  double prob_ratio_better = 0;
  double mean_g = 0;  // dollars^2
  double var_g = 0;   // dollars^4
  PreferenceMethod method = PreferenceMethod::normal_approx;
  std::optional<double> mc_std_err;
  bool degenerate = false;      // pi at 0 or 1: limit value returned
  std::size_t min_group_count = 0;  // normality diagnostic (smallest N_l)
  std::size_t distinct_values = 0;
};

/// Normal approximation: E(g) = pi sigma^2 / 2,
/// Var(g) = pi (1 - pi) sum_l N_l c_(l)^2 / N^2, prob = Phi(E(g) / sd(g)).
PreferenceReport preference_probability(const DistinctValueGroups& groups,
                                        const PopulationMoments& m, double pi);

struct Exhaustive {};
struct MonteCarlo {
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};
using PreferenceMode = std::variant<Exhaustive, MonteCarlo>;

/// P(g(U) > 0) by enumerating every U (N <= 20) or by seeded simulation. The
/// sign of g is evaluated in exact integer arithmetic; g == 0 counts as "not
/// preferred". Monte Carlo results do not depend on the worker count.
PreferenceReport preference_probability_exact(const ClaimPopulation& pop, double pi,
                                              const PreferenceMode& mode);

/// Roberts' all-or-nothing E(sigma_R^2 | pi):
///   pi (1-pi) mu2 [1 + (1/N)(s^2/m^2 + 4/(1 + s^2/m^2)
///                  - G1 / ((m/s)(1 + m^2/s^2)) - 5)],
/// with the large-N form pi (1 - pi) mu2 in `large_n_form`.
VariancePrediction roberts_ratio_variance(const PopulationMoments& m, double pi);

/// One-sided bound on pi after a sample of n claims showed no errors:
/// 1 - (1 - confidence)^(1/n).
double zero_error_pi_bound(std::size_t n, double confidence);

/// Coefficients of E(sigma_R^2) under the line-item model, with
/// k_i = -2 X_i / tau_x + tau_x2 / tau_x^2:
///   a1 = 1/N sum (1+k_i) X_i^2        a4 = 1/N sum_{i != i'} k_i (X_i' Xt_i + X_i Xt_i')
///   a2 = 1/N sum (1+k_i) Xt_i^2       a5 = 1/N sum_{i != i'} k_i Xt_i' Xt_i
///   a3 = 1/N sum (1+k_i) sum_j Xt_ij^2
struct PartialRCoefficients {
  double a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0;
  std::vector<double> k;  // per claim; empty when built from sums

  SurfaceCoefficients surface() const { return {a1, a2, a3, -a1, a4, a5}; }
};

PartialRCoefficients partial_r_coefficients(const ClaimPopulation& pop);
PartialRCoefficients partial_r_coefficients(const ClaimSums& sums);

/// g(pi, pl) = a1 pi(1-pi) + a2 (1-pi) pl^2 + a3 (1-pi) pl (1-pl)
///           + a4 pi (1-pi) pl + a5 (1-pi)^2 pl^2.
VariancePrediction expected_var_r(const PartialRCoefficients& coef, double pi, double pi_l);

/// Maximum of g over [0,1]^2 (g vanishes on pi = 1).
ConservativeSurface conservative_variance_ratio(const PartialRCoefficients& coef);

/// Maximum of roberts_ratio_variance over pi, attained at pi = 1/2.
VariancePrediction conservative_ratio_variance_aon(const PopulationMoments& m);

}  // namespace auditdesign
