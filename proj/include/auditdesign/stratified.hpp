#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "auditdesign/model.hpp"
#include "auditdesign/population.hpp"

namespace auditdesign {

enum class AllocationRule { neyman, proportional };

/// Claims with low <= X_i < high (no upper bound for the last stratum).
struct Stratum {
  Cents low;
  std::optional<Cents> high;
  std::size_t size = 0;  // N_h
  ClaimSums sums;
  PopulationMoments moments;
  double predicted_variance = 0;  // per-claim sigma_yh^2 or sigma_Rh^2
  std::size_t n = 0;              // n_h, 0 until allocated
};

struct StratificationPlan {
  std::vector<Cents> breakpoints;  // increasing; L - 1 entries
  std::vector<Stratum> strata;
  Estimator estimator = Estimator::simple_expansion;
  double total_variance = 0;  // set by allocate()
  std::vector<std::string> warnings;
};

/// Predicted per-claim variance of one stratum, computed stratum-locally with
/// the global error rates: Roberts (all-or-nothing) or the line-item surface
/// for simple expansion; Roberts' ratio formula or the line-item ratio
/// surface for ratio estimation.
double stratum_variance(const ClaimSums& sums, Estimator estimator, const ErrorModel& model);

/// Partitions the population at the breakpoints and predicts each stratum's
/// variance. Allocations are left at zero.
StratificationPlan make_plan(const ClaimPopulation& pop, std::vector<Cents> breakpoints,
                             Estimator estimator, const ErrorModel& model);

struct StratumTerm {
  std::size_t population = 0;  // N_h
  double variance = 0;         // sigma_h^2
  std::size_t sample = 0;      // n_h
};

/// sum_h N_h^2 sigma_h^2 / n_h (N_h - n_h)/(N_h - 1); single-claim strata
/// contribute 0 (and a warning). Throws when n_h > N_h or n_h = 0.
double stratified_variance(std::span<const StratumTerm> terms,
                           std::vector<std::string>* warnings = nullptr);

/// Recomputes every stratum's predicted variance under `model` and returns
/// the stratified variance for the plan's allocations.
double stratified_variance(const StratificationPlan& plan, const ErrorModel& model);

/// Largest-remainder allocation of n_total proportional to `weights`, with at
/// least min(2, cap_h) and at most cap_h per stratum; quotas pushed past a
/// bound are clamped and the excess shared by the same rule (ties to the lower
/// index). Zero-weight strata receive the floor unless every weighted stratum
/// is full, in which case they share the rest in proportion to their caps.
std::vector<std::size_t> allocate_counts(std::span<const double> weights,
                                         std::span<const std::size_t> caps, std::size_t n_total);

/// Neyman (n_h ~ N_h sigma_h) or proportional allocation; fills n_h and the
/// total variance.
StratificationPlan allocate(StratificationPlan plan, std::size_t n_total,
                            AllocationRule rule = AllocationRule::neyman);

/// Breakpoints minimizing the stratified variance after allocation. For
/// L <= 3 every combination of distinct claim totals is tried, keeping the
/// lexicographically smallest minimizer; for L > 3 a dynamic program over a
/// quantile grid of at most 200 candidate cuts minimizes sum N_h S_h
/// (Neyman) or sum N_h S_h^2 (proportional).
StratificationPlan optimize_breakpoints(const ClaimPopulation& pop, std::size_t strata,
                                        Estimator estimator, const ErrorModel& model,
                                        std::size_t n_total,
                                        AllocationRule rule = AllocationRule::neyman);

}  // namespace auditdesign
