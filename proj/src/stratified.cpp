#include "auditdesign/stratified.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "auditdesign/aon_design.hpp"
#include "auditdesign/error.hpp"
#include "auditdesign/partial_design.hpp"
#include "auditdesign/ratio_design.hpp"

namespace auditdesign {
namespace {

struct ValueGroup {
  Cents value;
  ClaimSums sums;
};

std::vector<ValueGroup> group_by_total(const ClaimPopulation& pop) {
  std::map<Cents, ClaimSums> groups;
  for (const auto& claim : pop.claims()) groups[claim.total()].add(claim);
  std::vector<ValueGroup> out;
  out.reserve(groups.size());
  for (auto& [value, sums] : groups) out.push_back({value, sums});
  return out;
}

std::vector<ClaimSums> prefix_sums(const std::vector<ValueGroup>& groups) {
  std::vector<ClaimSums> prefix(groups.size() + 1);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    prefix[g + 1] = prefix[g];
    prefix[g + 1] += groups[g].sums;
  }
  return prefix;
}

double weight_for(const Stratum& s, AllocationRule rule) {
  const double n = static_cast<double>(s.size);
  return rule == AllocationRule::neyman ? n * std::sqrt(std::max(s.predicted_variance, 0.0)) : n;
}

Stratum build_stratum(const ClaimSums& sums, Cents low, std::optional<Cents> high,
                      Estimator estimator, const ErrorModel& model) {
  Stratum s;
  s.low = low;
  s.high = high;
  s.size = sums.count;
  s.sums = sums;
  s.moments = moments_from_sums(sums);
  s.predicted_variance = stratum_variance(sums, estimator, model);
  return s;
}

// Plan for cut positions (group indices where a new stratum starts).
StratificationPlan plan_from_cuts(const std::vector<ValueGroup>& groups,
                                  const std::vector<ClaimSums>& prefix,
                                  const std::vector<std::size_t>& cuts, Estimator estimator,
                                  const ErrorModel& model) {
  StratificationPlan plan;
  plan.estimator = estimator;
  std::vector<std::size_t> bounds{0};
  bounds.insert(bounds.end(), cuts.begin(), cuts.end());
  bounds.push_back(groups.size());
  for (std::size_t h = 0; h + 1 < bounds.size(); ++h) {
    const std::size_t a = bounds[h];
    const std::size_t b = bounds[h + 1];
    std::optional<Cents> high;
    if (b < groups.size()) high = groups[b].value;
    const Cents low = a == 0 ? Cents{0} : groups[a].value;
    plan.strata.push_back(build_stratum(prefix[b] - prefix[a], low, high, estimator, model));
    if (h > 0) plan.breakpoints.push_back(groups[a].value);
  }
  return plan;
}

// Continuous allocation q_h = clamp(lambda w_h, lo_h, hi_h) with sum q_h =
// total; free quotas are formed exactly from the clamped set and snapped to
// integers within 1e-9.
std::vector<double> water_fill(const std::vector<double>& w, const std::vector<double>& lo,
                               const std::vector<double>& hi, double total) {
  const std::size_t strata = w.size();
  const auto filled = [&](double lambda) {
    double sum = 0;
    for (std::size_t h = 0; h < strata; ++h) sum += std::clamp(lambda * w[h], lo[h], hi[h]);
    return sum;
  };
  double a = 0;
  double b = 1;
  while (filled(b) < total && b < 1e300) b *= 2;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = a + (b - a) / 2;
    (filled(mid) < total ? a : b) = mid;
  }
  std::vector<double> q(strata);
  std::vector<bool> free(strata, false);
  double rest = total;
  double free_weight = 0;
  for (std::size_t h = 0; h < strata; ++h) {
    const double v = b * w[h];
    if (w[h] > 0 && v > lo[h] && v < hi[h]) {
      free[h] = true;
      free_weight += w[h];
    } else {
      q[h] = std::clamp(v, lo[h], hi[h]);
      rest -= q[h];
    }
  }
  for (std::size_t h = 0; h < strata; ++h) {
    if (!free[h]) continue;
    q[h] = std::clamp(rest * w[h] / free_weight, lo[h], hi[h]);
  }
  for (double& v : q) {
    const double nearest = std::round(v);
    if (std::abs(v - nearest) <= 1e-9 * std::max(1.0, v)) v = nearest;
  }
  return q;
}

bool strictly_better(double candidate, double best) {
  return candidate < best - 1e-12 * std::abs(best);
}

}  // namespace

double stratum_variance(const ClaimSums& sums, Estimator estimator, const ErrorModel& model) {
  validate(model);
  const bool line_items = std::holds_alternative<LineItemModel>(model);
  const double pi = claim_rate(model);
  const double pi_l = line_rate(model);
  if (estimator == Estimator::simple_expansion) {
    if (line_items) return expected_var_y(partial_y_coefficients(sums), pi, pi_l).value;
    return roberts_variance(moments_from_sums(sums), pi).value;
  }
  if (line_items) return expected_var_r(partial_r_coefficients(sums), pi, pi_l).value;
  return roberts_ratio_variance(moments_from_sums(sums), pi).value;
}

StratificationPlan make_plan(const ClaimPopulation& pop, std::vector<Cents> breakpoints,
                             Estimator estimator, const ErrorModel& model) {
  if (!std::is_sorted(breakpoints.begin(), breakpoints.end()) ||
      std::adjacent_find(breakpoints.begin(), breakpoints.end()) != breakpoints.end()) {
    throw ValidationError("breakpoints must be strictly increasing");
  }
  const std::size_t strata = breakpoints.size() + 1;
  std::vector<ClaimSums> sums(strata);
  for (const auto& claim : pop.claims()) {
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), claim.total());
    sums[static_cast<std::size_t>(it - breakpoints.begin())].add(claim);
  }
  StratificationPlan plan;
  plan.estimator = estimator;
  plan.breakpoints = breakpoints;
  for (std::size_t h = 0; h < strata; ++h) {
    if (sums[h].count == 0) throw ValidationError(fmt::format("stratum {} is empty", h + 1));
    const Cents low = h == 0 ? Cents{0} : breakpoints[h - 1];
    std::optional<Cents> high;
    if (h < breakpoints.size()) high = breakpoints[h];
    plan.strata.push_back(build_stratum(sums[h], low, high, estimator, model));
  }
  return plan;
}

double stratified_variance(std::span<const StratumTerm> terms, std::vector<std::string>* warnings) {
  long double total = 0;
  for (std::size_t h = 0; h < terms.size(); ++h) {
    const auto& t = terms[h];
    if (t.population == 0) continue;
    if (t.sample == 0) throw ValidationError(fmt::format("stratum {} has no sample", h + 1));
    if (t.sample > t.population) {
      throw ValidationError(fmt::format("stratum {}: sample {} exceeds stratum size {}", h + 1,
                                        t.sample, t.population));
    }
    if (t.population == 1) {
      if (warnings) warnings->push_back(fmt::format("stratum {} has a single claim", h + 1));
      continue;
    }
    const long double big_n = static_cast<long double>(t.population);
    const long double small_n = static_cast<long double>(t.sample);
    total += big_n * big_n * t.variance / small_n * (big_n - small_n) / (big_n - 1);
  }
  return static_cast<double>(total);
}

double stratified_variance(const StratificationPlan& plan, const ErrorModel& model) {
  std::vector<StratumTerm> terms;
  for (const auto& s : plan.strata) {
    terms.push_back({s.size, stratum_variance(s.sums, plan.estimator, model), s.n});
  }
  return stratified_variance(terms);
}

std::vector<std::size_t> allocate_counts(std::span<const double> weights,
                                         std::span<const std::size_t> caps, std::size_t n_total) {
  const std::size_t strata = weights.size();
  if (caps.size() != strata) throw ValidationError("weights and caps differ in length");
  std::vector<double> lo(strata), hi(strata);
  double floor_total = 0;
  double cap_total = 0;
  double reachable = 0;  // largest total the weights alone can reach
  for (std::size_t h = 0; h < strata; ++h) {
    if (!(weights[h] >= 0) || !std::isfinite(weights[h])) {
      throw ValidationError("allocation weights must be finite and nonnegative");
    }
    lo[h] = static_cast<double>(std::min<std::size_t>(2, caps[h]));
    hi[h] = static_cast<double>(caps[h]);
    floor_total += lo[h];
    cap_total += hi[h];
    reachable += weights[h] > 0 ? hi[h] : lo[h];
  }
  const auto total = static_cast<double>(n_total);
  if (total < floor_total) {
    throw ValidationError(fmt::format(
        "sample size {} is too small: each of {} strata needs at least 2", n_total, strata));
  }
  if (total > cap_total) {
    throw ValidationError(fmt::format("sample size {} exceeds population size {}", n_total, cap_total));
  }

  std::vector<double> quota(strata);
  if (total <= reachable) {
    quota = water_fill(std::vector<double>(weights.begin(), weights.end()), lo, hi, total);
  } else {
    // Weighted strata are full; the rest share the remainder by size.
    std::vector<double> w(strata, 0.0);
    for (std::size_t h = 0; h < strata; ++h) {
      if (weights[h] > 0) {
        lo[h] = hi[h];
      } else {
        w[h] = hi[h];
      }
    }
    quota = water_fill(w, lo, hi, total);
  }

  std::vector<std::size_t> n(strata);
  std::size_t assigned = 0;
  for (std::size_t h = 0; h < strata; ++h) {
    n[h] = static_cast<std::size_t>(std::floor(quota[h]));
    assigned += n[h];
  }
  std::vector<std::size_t> order(strata);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double fa = quota[a] - std::floor(quota[a]);
    const double fb = quota[b] - std::floor(quota[b]);
    if (std::abs(fa - fb) <= 1e-12) return false;
    return fa > fb;
  });
  std::size_t leftover = n_total - std::min(assigned, n_total);
  for (std::size_t h : order) {
    if (leftover == 0) break;
    if (n[h] < caps[h]) {
      ++n[h];
      --leftover;
    }
  }
  return n;
}

StratificationPlan allocate(StratificationPlan plan, std::size_t n_total, AllocationRule rule) {
  std::vector<double> weights;
  std::vector<std::size_t> caps;
  for (const auto& s : plan.strata) {
    weights.push_back(weight_for(s, rule));
    caps.push_back(s.size);
  }
  const auto counts = allocate_counts(weights, caps, n_total);
  std::vector<StratumTerm> terms;
  for (std::size_t h = 0; h < plan.strata.size(); ++h) {
    plan.strata[h].n = counts[h];
    terms.push_back({plan.strata[h].size, plan.strata[h].predicted_variance, counts[h]});
  }
  plan.warnings.clear();
  plan.total_variance = stratified_variance(terms, &plan.warnings);
  return plan;
}

StratificationPlan optimize_breakpoints(const ClaimPopulation& pop, std::size_t strata,
                                        Estimator estimator, const ErrorModel& model,
                                        std::size_t n_total, AllocationRule rule) {
  validate(model);
  if (strata < 2) throw ValidationError("at least 2 strata are required");
  const auto groups = group_by_total(pop);
  const std::size_t distinct = groups.size();
  if (strata > distinct) {
    throw ValidationError(fmt::format("{} strata requested but only {} distinct claim totals",
                                      strata, distinct));
  }
  const auto prefix = prefix_sums(groups);

  if (strata <= 3) {
    std::vector<std::size_t> cuts(strata - 1);
    std::iota(cuts.begin(), cuts.end(), std::size_t{1});
    std::optional<StratificationPlan> best;
    std::size_t feasible = 0;
    // Odometer over increasing cut vectors, in lexicographic order.
    while (true) {
      try {
        auto plan = allocate(plan_from_cuts(groups, prefix, cuts, estimator, model), n_total, rule);
        ++feasible;
        if (!best || strictly_better(plan.total_variance, best->total_variance)) best = std::move(plan);
      } catch (const ValidationError&) {
        // Infeasible allocation for this partition (n_total below the floors).
      }
      std::size_t k = cuts.size();
      while (k > 0 && cuts[k - 1] == distinct - (cuts.size() - (k - 1))) --k;
      if (k == 0) break;
      ++cuts[k - 1];
      for (std::size_t j = k; j < cuts.size(); ++j) cuts[j] = cuts[j - 1] + 1;
    }
    if (!best) throw ValidationError("no feasible stratification for the requested sample size");
    return *best;
  }

  // Candidate cut positions on a quantile grid of the claim count.
  const std::size_t grid = std::min<std::size_t>(distinct - 1, 200);
  std::vector<std::size_t> positions{0};
  {
    const std::size_t total = pop.size();
    std::size_t g = 0;
    for (std::size_t k = 1; k <= grid; ++k) {
      const std::size_t target = k * total / (grid + 1);
      while (g < distinct && prefix[g].count < target) ++g;
      const std::size_t pos = std::clamp<std::size_t>(g, 1, distinct - 1);
      if (pos > positions.back()) positions.push_back(pos);
    }
    positions.push_back(distinct);
  }
  const std::size_t m = positions.size();
  if (strata > m - 1) throw ValidationError("too many strata for the candidate grid");

  const auto cost = [&](std::size_t a, std::size_t b) {
    const ClaimSums s = prefix[positions[b]] - prefix[positions[a]];
    const double nh = static_cast<double>(s.count);
    const double var = std::max(stratum_variance(s, estimator, model), 0.0);
    const double s2 = s.count > 1 ? var * nh / (nh - 1) : 0.0;
    return rule == AllocationRule::neyman ? nh * std::sqrt(s2) : nh * s2;
  };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // best[h][j]: minimal cost of covering positions[0..j) with h strata.
  std::vector<std::vector<double>> best(strata + 1, std::vector<double>(m, kInf));
  std::vector<std::vector<std::size_t>> from(strata + 1, std::vector<std::size_t>(m, 0));
  best[0][0] = 0;
  for (std::size_t h = 1; h <= strata; ++h) {
    for (std::size_t j = h; j < m; ++j) {
      for (std::size_t i = h - 1; i < j; ++i) {
        if (best[h - 1][i] == kInf) continue;
        const double v = best[h - 1][i] + cost(i, j);
        if (v < best[h][j]) {
          best[h][j] = v;
          from[h][j] = i;
        }
      }
    }
  }
  std::vector<std::size_t> cuts;
  for (std::size_t h = strata, j = m - 1; h > 1; --h) {
    j = from[h][j];
    cuts.push_back(positions[j]);
  }
  std::reverse(cuts.begin(), cuts.end());
  return allocate(plan_from_cuts(groups, prefix, cuts, estimator, model), n_total, rule);
}

}  // namespace auditdesign
