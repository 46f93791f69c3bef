#include "auditdesign/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "auditdesign/error.hpp"
#include "auditdesign/numerics.hpp"
#include "auditdesign/partial_design.hpp"
#include "auditdesign/ratio_design.hpp"
#include "auditdesign/rng.hpp"

namespace auditdesign {
namespace {

// Runs body(i) for i in [0, count) on up to `workers` threads. Callers write
// per-index results, so the outcome does not depend on the split.
template <typename Body>
void parallel_for(std::size_t count, std::size_t workers, Body body) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    threads.emplace_back([&, t] {
      for (std::size_t i = t * count / workers; i < (t + 1) * count / workers; ++i) body(i);
    });
  }
  for (auto& th : threads) th.join();
}

struct ReplicateResult {
  bool covered = false;
  long double error = 0;   // estimate - truth, dollars
  long double margin = 0;  // dollars
};

}  // namespace

Cents RealizedPopulation::total_error() const {
  Cents total{0};
  for (Cents v : y) total += v;
  return total;
}

RealizedPopulation realize(const ClaimPopulation& pop, const ErrorModel& model, std::uint64_t seed) {
  validate(model);
  const double pi = claim_rate(model);
  const double pi_l = line_rate(model);
  std::vector<Cents> y;
  y.reserve(pop.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    CounterRng rng(stream_seed(seed, i));
    const Claim& claim = pop[i];
    const bool whole = rng.bernoulli(pi);
    Cents yi{0};
    for (const auto& line : claim.lines) {
      const bool fires = rng.bernoulli(pi_l);
      if (!whole && fires) yi += line.probable_error;
    }
    y.push_back(whole ? claim.total() : yi);
  }
  return RealizedPopulation{pop, std::move(y), model, seed};
}

CoverageReport simulate_estimation(const RealizedPopulation& rp, std::size_t n, Estimator estimator,
                                   double confidence, std::size_t replicates, std::uint64_t seed,
                                   std::size_t workers) {
  const std::size_t big_n = rp.base.size();
  if (n < 2 || n > big_n) {
    throw ValidationError(fmt::format("sample size must lie in [2, {}], got {}", big_n, n));
  }
  if (replicates == 0) throw ValidationError("at least one replicate is required");
  const double z = two_sided_z(confidence);

  std::vector<std::int64_t> xs(big_n);
  std::vector<std::int64_t> ys(big_n);
  Int128 tau_x = 0;
  Int128 tau_y = 0;
  for (std::size_t i = 0; i < big_n; ++i) {
    xs[i] = rp.base[i].total().value;
    ys[i] = rp.y[i].value;
    tau_x += xs[i];
    tau_y += ys[i];
  }
  const long double truth = static_cast<long double>(tau_y) / 100;
  const long double nn = static_cast<long double>(n);
  const long double bn = static_cast<long double>(big_n);
  const long double fpc = 1 - nn / bn;

  std::vector<ReplicateResult> results(replicates);
  parallel_for(replicates, workers, [&](std::size_t r) {
    CounterRng rng(stream_seed(seed, r));
    std::vector<std::uint32_t> idx(big_n);
    std::iota(idx.begin(), idx.end(), 0u);
    Int128 sx = 0;
    Int128 sy = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng.below(big_n - k));
      std::swap(idx[k], idx[j]);
      sx += xs[idx[k]];
      sy += ys[idx[k]];
    }
    long double estimate = 0;
    long double ss = 0;  // sum of squared deviations, cents^2
    if (estimator == Estimator::simple_expansion) {
      const long double mean = static_cast<long double>(sy) / nn;
      for (std::size_t k = 0; k < n; ++k) {
        const long double d = static_cast<long double>(ys[idx[k]]) - mean;
        ss += d * d;
      }
      estimate = bn * mean / 100;
    } else {
      const long double ratio = static_cast<long double>(sy) / static_cast<long double>(sx);
      for (std::size_t k = 0; k < n; ++k) {
        const long double d =
            static_cast<long double>(ys[idx[k]]) - ratio * static_cast<long double>(xs[idx[k]]);
        ss += d * d;
      }
      estimate = ratio * static_cast<long double>(tau_x) / 100;
    }
    const long double s2 = ss / (nn - 1) / 10000;
    const long double var = std::max<long double>(bn * bn * s2 / nn * fpc, 0);
    const long double margin = z * std::sqrt(var);
    const long double err = estimate - truth;
    const long double slack = 1e-6L + 1e-12L * std::abs(truth);
    results[r] = {std::abs(err) <= margin + slack, err, margin};
  });

  std::size_t covered = 0;
  long double sum_margin = 0;
  long double sum_sq = 0;
  for (const auto& res : results) {
    covered += res.covered;
    sum_margin += res.margin;
    sum_sq += res.error * res.error;
  }
  const long double reps = static_cast<long double>(replicates);
  CoverageReport report;
  report.replicates = replicates;
  report.estimator = estimator;
  report.nominal = confidence;
  report.attained = static_cast<double>(covered) / static_cast<double>(replicates);
  report.mean_margin = static_cast<double>(sum_margin / reps);
  report.rmse = static_cast<double>(std::sqrt(sum_sq / reps));
  report.seed = seed;
  report.n = n;
  report.pi = claim_rate(rp.model);
  report.pi_l = line_rate(rp.model);
  return report;
}

OracleExpectations oracle_expectations(const ClaimPopulation& pop, double pi, double pi_l) {
  const std::size_t big_n = pop.size();
  if (big_n > kOracleMaxClaims || pop.line_count() > kOracleMaxLines) {
    throw ValidationError(fmt::format("oracle supports at most {} claims and {} lines",
                                      kOracleMaxClaims, kOracleMaxLines));
  }
  validate(LineItemModel{pi, pi_l});

  std::vector<std::int64_t> x(big_n);
  std::vector<std::vector<std::int64_t>> xt(big_n);
  std::int64_t s = 0;
  Int128 s2 = 0;
  for (std::size_t i = 0; i < big_n; ++i) {
    x[i] = pop[i].total().value;
    s += x[i];
    s2 += static_cast<Int128>(x[i]) * x[i];
    for (const auto& line : pop[i].lines) xt[i].push_back(line.probable_error.value);
  }
  const std::size_t lines = pop.line_count();
  const std::size_t bits = big_n + lines;
  const long double n_ld = static_cast<long double>(big_n);
  const long double p = pi;
  const long double q = pi_l;

  long double e_y = 0;
  long double e_r = 0;
  long double p_g = 0;
  std::vector<std::int64_t> y(big_n);
  for (std::uint32_t mask = 0; mask < (1u << bits); ++mask) {
    long double weight = 1;
    std::size_t bit = big_n;
    for (std::size_t i = 0; i < big_n; ++i) {
      const bool u = mask & (1u << i);
      weight *= u ? p : 1 - p;
      std::int64_t line_sum = 0;
      for (std::int64_t amount : xt[i]) {
        const bool w = mask & (1u << bit++);
        weight *= w ? q : 1 - q;
        if (w) line_sum += amount;
      }
      y[i] = u ? x[i] : line_sum;
    }
    if (weight == 0) continue;

    Int128 sy = 0;
    Int128 syy = 0;
    Int128 sxy = 0;
    for (std::size_t i = 0; i < big_n; ++i) {
      sy += y[i];
      syy += static_cast<Int128>(y[i]) * y[i];
      sxy += static_cast<Int128>(x[i]) * y[i];
    }
    // N sigma_y^2 N = N syy - sy^2 exactly.
    const long double var_y =
        static_cast<long double>(static_cast<Int128>(big_n) * syy - sy * sy) / (n_ld * n_ld);
    const long double r = static_cast<long double>(sy) / static_cast<long double>(s);
    long double ss_r = 0;
    for (std::size_t i = 0; i < big_n; ++i) {
      const long double d = static_cast<long double>(y[i]) - r * static_cast<long double>(x[i]);
      ss_r += d * d;
    }
    e_y += weight * var_y;
    e_r += weight * ss_r / n_ld;
    // sigma_R^2 < sigma_y^2  <=>  sy (2 N S sxy - sy (N S2 + S^2)) > 0.
    const Int128 big = static_cast<Int128>(big_n);
    const Int128 bracket = 2 * big * s * sxy - sy * (big * s2 + static_cast<Int128>(s) * s);
    if (sy > 0 && bracket > 0) p_g += weight;
  }
  return {static_cast<double>(e_y / 10000), static_cast<double>(e_r / 10000),
          static_cast<double>(p_g)};
}

ClaimPopulation random_mini_population(std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(stream_seed(seed, index));
  const std::size_t claims = 1 + static_cast<std::size_t>(rng.below(kOracleMaxClaims));
  std::vector<Claim> out;
  std::size_t used = 0;
  for (std::size_t i = 0; i < claims; ++i) {
    const std::size_t reserve = claims - i - 1;
    const std::size_t allowed = std::min<std::size_t>(3, kOracleMaxLines - used - reserve);
    const std::size_t lines = 1 + static_cast<std::size_t>(rng.below(allowed));
    used += lines;
    Claim claim;
    claim.id = fmt::format("M{}", i + 1);
    for (std::size_t j = 0; j < lines; ++j) {
      const std::int64_t dollars = 1 + static_cast<std::int64_t>(rng.below(100));
      std::int64_t error = 0;
      const auto kind = rng.below(6);
      if (kind < 2) {
        error = dollars;
      } else if (kind > 2) {
        error = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(dollars) + 1));
      }
      claim.lines.push_back({Cents{dollars * 100}, Cents{error * 100}});
    }
    out.push_back(std::move(claim));
  }
  return ClaimPopulation(std::move(out));
}

bool oracle_agrees(double a, double b, double scale) {
  const double diff = std::abs(a - b);
  return diff <= 1e-9 * std::max(std::abs(a), std::abs(b)) || diff <= 1e-12 * std::abs(scale);
}

OracleSuiteReport run_oracle_suite(std::size_t populations, std::uint64_t seed, std::size_t workers) {
  static constexpr double kGrid[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  struct PerPopulation {
    std::size_t checks = 0, y_fail = 0, r_fail = 0, pref_checks = 0, pref_fail = 0;
    double max_y = 0, max_r = 0;
  };
  std::vector<PerPopulation> results(populations);
  parallel_for(populations, workers, [&](std::size_t k) {
    const ClaimPopulation pop = random_mini_population(seed, k);
    const auto y_coef = partial_y_coefficients(pop);
    const auto r_coef = partial_r_coefficients(pop);
    const double scale = compute_moments(pop).mu_x2;
    auto& out = results[k];
    const auto rel = [scale](double a, double b) {
      const double m = std::max({std::abs(a), std::abs(b), 1e-3 * scale});
      return m > 0 ? std::abs(a - b) / m : 0.0;
    };
    for (double pi : kGrid) {
      for (double pi_l : kGrid) {
        const auto oracle = oracle_expectations(pop, pi, pi_l);
        const double vy = expected_var_y(y_coef, pi, pi_l).value;
        const double vr = expected_var_r(r_coef, pi, pi_l).value;
        ++out.checks;
        out.max_y = std::max(out.max_y, rel(vy, oracle.e_sigma_y2));
        out.max_r = std::max(out.max_r, rel(vr, oracle.e_sigma_r2));
        if (!oracle_agrees(vy, oracle.e_sigma_y2, scale)) ++out.y_fail;
        if (!oracle_agrees(vr, oracle.e_sigma_r2, scale)) ++out.r_fail;
        if (pi_l == 0.0) {
          const auto exact = preference_probability_exact(pop, pi, Exhaustive{});
          ++out.pref_checks;
          if (std::abs(exact.prob_ratio_better - oracle.p_g_positive) > 1e-12) ++out.pref_fail;
        }
      }
    }
  });
  OracleSuiteReport report;
  report.populations = populations;
  for (const auto& r : results) {
    report.checks += r.checks;
    report.y_failures += r.y_fail;
    report.r_failures += r.r_fail;
    report.preference_checks += r.pref_checks;
    report.preference_failures += r.pref_fail;
    report.max_rel_err_y = std::max(report.max_rel_err_y, r.max_y);
    report.max_rel_err_r = std::max(report.max_rel_err_r, r.max_r);
  }
  return report;
}

}  // namespace auditdesign
