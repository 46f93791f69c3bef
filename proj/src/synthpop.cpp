#include "auditdesign/synthpop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "auditdesign/error.hpp"
#include "auditdesign/rng.hpp"

namespace auditdesign {
namespace {

constexpr std::uint64_t kEdwardsStream = 0xED;
constexpr std::uint64_t kNeterStream = 0x4E;
constexpr std::uint64_t kClinicStream = 0xC1;

std::int64_t to_cents(double dollars) {
  return std::max<std::int64_t>(1, std::llround(dollars * 100));
}

std::string claim_id(char prefix, std::size_t i) { return fmt::format("{}{:06d}", prefix, i + 1); }

// Multiplies every amount by `factor`, so that the total lands on `target`.
void rescale_to_total(std::vector<double>& amounts, double target) {
  const double total = std::accumulate(amounts.begin(), amounts.end(), 0.0);
  const double factor = target / total;
  for (double& a : amounts) a *= factor;
}

ClaimPopulation single_line_population(char prefix, const std::vector<double>& amounts) {
  std::vector<Claim> claims;
  claims.reserve(amounts.size());
  for (std::size_t i = 0; i < amounts.size(); ++i) {
    const Cents x{to_cents(amounts[i])};
    claims.push_back({claim_id(prefix, i), {LineItem{x, x}}});
  }
  return ClaimPopulation(std::move(claims));
}

ClaimPopulation generate_edwards(std::uint64_t seed, std::size_t n) {
  constexpr double kSpikeShare = 0.30;
  constexpr double kBodyMean = 121.0;
  constexpr double kBodyCv = 0.70;
  const double target_total = 1.1e6 * static_cast<double>(n) / 9000.0;

  const double log_var = std::log1p(kBodyCv * kBodyCv);
  const double log_sd = std::sqrt(log_var);
  const double log_mean = std::log(kBodyMean) - log_var / 2;

  CounterRng rng(stream_seed(seed, kEdwardsStream));
  std::vector<double> amounts(n);
  std::vector<bool> in_spike(n);
  double spike_total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    in_spike[i] = rng.uniform() < kSpikeShare;
    if (in_spike[i]) {
      amounts[i] = 100.0 + 50.0 * rng.uniform();
      spike_total += amounts[i];
    } else {
      amounts[i] = std::exp(log_mean + log_sd * rng.normal());
    }
  }
  // Only the body is rescaled, so the spike stays inside $100-150.
  double body_total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_spike[i]) body_total += amounts[i];
  }
  const double body_factor = body_total > 0 ? (target_total - spike_total) / body_total : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_spike[i]) amounts[i] *= body_factor;
  }
  return single_line_population('E', amounts);
}

ClaimPopulation generate_neter(std::uint64_t seed, std::size_t n) {
  // Log-sd chosen for a coefficient of variation near 2.1.
  constexpr double kLogSd = 1.3015;
  const double target_total = 7.5e6 * static_cast<double>(n) / 4033.0;
  CounterRng rng(stream_seed(seed, kNeterStream));
  std::vector<double> amounts(n);
  for (double& a : amounts) a = std::exp(kLogSd * rng.normal());
  rescale_to_total(amounts, target_total);
  return single_line_population('N', amounts);
}

ClaimPopulation generate_clinic(std::uint64_t seed, std::size_t n) {
  constexpr double kShare1 = 0.63;
  constexpr double kShare2 = 0.33;
  constexpr double kShare3 = 0.04;
  constexpr double kTotalMean = 30.54;
  constexpr double kTotalSd = 13.43;
  constexpr double kErrorMean = 8.54;
  constexpr double kErrorSd = 6.45;

  // Moments of the line count b.
  const double b_mean = kShare1 + 2 * kShare2 + 3 * kShare3;
  const double b_var = kShare1 + 4 * kShare2 + 9 * kShare3 - b_mean * b_mean;

  // Lines ~ Gamma(k, theta) iid given b:
  //   E[T] = E[b] k theta,  Var[T] = E[b] k theta^2 + Var[b] (k theta)^2.
  const double line_mean = kTotalMean / b_mean;
  const double theta = (kTotalSd * kTotalSd - b_var * line_mean * line_mean) / (b_mean * line_mean);
  const double shape = line_mean / theta;

  // Probable error = line amount * f, f ~ Beta with matching first two moments.
  const double f_mean = kErrorMean / line_mean;
  const double line_sq = line_mean * line_mean + shape * theta * theta;
  const double f_sq = (kErrorSd * kErrorSd + kErrorMean * kErrorMean) / line_sq;
  const double f_var = f_sq - f_mean * f_mean;
  const double nu = f_mean * (1 - f_mean) / f_var - 1;
  const double beta_a = f_mean * nu;
  const double beta_b = (1 - f_mean) * nu;

  CounterRng rng(stream_seed(seed, kClinicStream));
  std::vector<std::vector<double>> lines(n);
  std::vector<std::vector<double>> fractions(n);
  double grand_total = 0;
  std::size_t line_total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const std::size_t b = u < kShare1 ? 1 : (u < kShare1 + kShare2 ? 2 : 3);
    for (std::size_t j = 0; j < b; ++j) {
      lines[i].push_back(theta * rng.gamma(shape));
      fractions[i].push_back(rng.beta(beta_a, beta_b));
      grand_total += lines[i].back();
    }
    line_total += b;
  }

  const double amount_factor = kTotalMean * static_cast<double>(n) / grand_total;
  double error_total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < lines[i].size(); ++j) {
      lines[i][j] *= amount_factor;
      error_total += lines[i][j] * fractions[i][j];
    }
  }
  const double error_factor = kErrorMean * static_cast<double>(line_total) / error_total;

  std::vector<Claim> claims;
  claims.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Claim claim{claim_id('C', i), {}};
    for (std::size_t j = 0; j < lines[i].size(); ++j) {
      const std::int64_t x = to_cents(lines[i][j]);
      const double f = std::min(1.0, fractions[i][j] * error_factor);
      const std::int64_t e = std::min<std::int64_t>(x, std::llround(static_cast<double>(x) * f));
      claim.lines.push_back({Cents{x}, Cents{e}});
    }
    claims.push_back(std::move(claim));
  }
  return ClaimPopulation(std::move(claims));
}

}  // namespace

SynthKind parse_synth_kind(std::string_view name) {
  if (name == "edwards") return SynthKind::edwards;
  if (name == "neter") return SynthKind::neter;
  if (name == "clinic") return SynthKind::clinic;
  throw ValidationError("unknown population kind '" + std::string(name) + "'");
}

std::string_view to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::edwards: return "edwards";
    case SynthKind::neter: return "neter";
    case SynthKind::clinic: return "clinic";
  }
  return "unknown";
}

std::size_t default_size(SynthKind kind) {
  switch (kind) {
    case SynthKind::edwards: return 9000;
    case SynthKind::neter: return 4033;
    case SynthKind::clinic: return 1000;
  }
  return 0;
}

ClaimPopulation generate(const SynthSpec& spec) {
  const std::size_t n = spec.size_override.value_or(default_size(spec.kind));
  if (n == 0) throw ValidationError("population size must be positive");
  switch (spec.kind) {
    case SynthKind::edwards: return generate_edwards(spec.seed, n);
    case SynthKind::neter: return generate_neter(spec.seed, n);
    case SynthKind::clinic: return generate_clinic(spec.seed, n);
  }
  throw ValidationError("unknown population kind");
}

ClaimPopulation coarsen(const ClaimPopulation& pop, std::size_t levels) {
  if (levels == 0) throw ValidationError("levels must be positive");
  const std::size_t n = pop.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pop[a].total() < pop[b].total();
  });
  std::vector<Cents> value(n);
  for (std::size_t bin = 0; bin < levels; ++bin) {
    const std::size_t lo = bin * n / levels;
    const std::size_t hi = (bin + 1) * n / levels;
    if (lo == hi) continue;
    Int128 sum = 0;
    for (std::size_t k = lo; k < hi; ++k) sum += pop[order[k]].total().value;
    const auto count = static_cast<Int128>(hi - lo);
    const Cents level{static_cast<std::int64_t>((2 * sum + count) / (2 * count))};
    for (std::size_t k = lo; k < hi; ++k) value[order[k]] = level;
  }
  std::vector<Claim> claims;
  claims.reserve(n);
  for (std::size_t i = 0; i < n; ++i) claims.push_back({pop[i].id, {LineItem{value[i], value[i]}}});
  return ClaimPopulation(std::move(claims));
}

}  // namespace auditdesign
