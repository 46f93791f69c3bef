#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "auditdesign/model.hpp"
#include "auditdesign/population.hpp"

namespace auditdesign {

/// A population with one draw of disallowed amounts (cents per claim).
struct RealizedPopulation {
  ClaimPopulation base;
  std::vector<Cents> y;
  ErrorModel model;
  std::uint64_t seed = 0;

  Cents total_error() const;
};

/// Each claim independently: wholly in error with probability pi, otherwise
/// each line errs by its probable error amount with probability pi_l. Claim i
/// draws from its own stream, so the result does not depend on claim order
/// within the computation.
RealizedPopulation realize(const ClaimPopulation& pop, const ErrorModel& model, std::uint64_t seed);

struct CoverageReport {
  std::size_t replicates = 0;
  Estimator estimator = Estimator::simple_expansion;
  double nominal = 0;
  double attained = 0;
  double mean_margin = 0;  // dollars
  double rmse = 0;         // dollars
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double pi = 0;
  double pi_l = 0;
};

/// Repeated simple random samples of n claims without replacement; each
/// replicate forms the estimate, a normal-theory interval with the sample
/// variance (divisor n - 1) and the finite population correction 1 - n/N,
/// and records whether it covers the true total. Independent of `workers`.
CoverageReport simulate_estimation(const RealizedPopulation& rp, std::size_t n, Estimator estimator,
                                   double confidence, std::size_t replicates, std::uint64_t seed,
                                   std::size_t workers = 1);

/// Exact expectations by enumerating every (U, W) assignment.
struct OracleExpectations {
  double e_sigma_y2 = 0;  // dollars^2
  double e_sigma_r2 = 0;  // dollars^2
  double p_g_positive = 0;
};

inline constexpr std::size_t kOracleMaxClaims = 4;
inline constexpr std::size_t kOracleMaxLines = 8;

/// Requires N <= 4 and at most 8 lines in total. The preference event is
/// sigma_R^2 < sigma_y^2 for the realized Y, decided in integer arithmetic.
OracleExpectations oracle_expectations(const ClaimPopulation& pop, double pi, double pi_l);

/// Deterministic random desk-scale population: 1 to 4 claims with 1 to 3
/// lines each (at most 8 lines), whole-dollar amounts from 1 to 100, and
/// probable errors equal to the line amount, zero, or uniform below it.
ClaimPopulation random_mini_population(std::uint64_t seed, std::uint64_t index);

/// |a - b| <= 1e-9 max(|a|, |b|), or within 1e-12 * scale for values that
/// vanish analytically.
bool oracle_agrees(double a, double b, double scale);

struct OracleSuiteReport {
  std::size_t populations = 0;
  std::size_t checks = 0;
  std::size_t y_failures = 0;
  std::size_t r_failures = 0;
  std::size_t preference_failures = 0;
  std::size_t preference_checks = 0;
  // Largest relative error; denominators are floored at 1e-3 mu_x^(2).
  double max_rel_err_y = 0;
  double max_rel_err_r = 0;
};

/// Closed-form E(sigma_y^2) and E(sigma_R^2) against the enumeration oracle
/// for `populations` mini-populations over (pi, pi_l) in {0, .25, .5, .75, 1}^2,
/// plus exhaustive preference probabilities against the oracle at pi_l = 0.
OracleSuiteReport run_oracle_suite(std::size_t populations, std::uint64_t seed,
                                   std::size_t workers = 1);

}  // namespace auditdesign
