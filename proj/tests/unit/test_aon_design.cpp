#include <doctest.h>

#include <cmath>

#include "auditdesign/aon_design.hpp"
#include "auditdesign/error.hpp"
#include "auditdesign/numerics.hpp"
#include "oracles.hpp"

using namespace auditdesign;

namespace {

// E over U of the population variance of Y.
double enumerated_var_y(const std::vector<double>& x, double pi) {
  return static_cast<double>(oracle::expect_aon(x, pi, oracle::pop_variance));
}

// Distribution of Y = U X_I for a uniformly chosen claim I: mean and variance.
std::pair<double, double> enumerated_total(const std::vector<double>& x, double pi) {
  long double m1 = 0, m2 = 0;
  const long double w = 1.0L / static_cast<long double>(x.size());
  for (double v : x) {
    m1 += w * pi * v;
    m2 += w * pi * v * v;
  }
  return {static_cast<double>(m1), static_cast<double>(m2 - m1 * m1)};
}

// Smallest n in [1, N] whose achieved margin is at most E.
std::size_t scan_sample_size(std::size_t big_n, double v, double e, double conf) {
  const double z = two_sided_z(conf);
  for (std::size_t n = 1; n <= big_n; ++n) {
    const double nn = static_cast<double>(n), bn = static_cast<double>(big_n);
    const double margin = z * std::sqrt(bn * bn * v / nn * (bn - nn) / (bn - 1));
    if (margin <= e) return n;
  }
  return big_n;
}

}  // namespace

TEST_CASE("roberts variance of {10, 20}") {
  const auto m = compute_moments(oracle::one_line({10, 20}));
  CHECK(roberts_variance(m, 0.5).value == doctest::Approx(37.5));
  CHECK(roberts_variance(m, 0.5).value == doctest::Approx(enumerated_var_y({10, 20}, 0.5)));
  CHECK(roberts_variance(m, 0).value == 0);
  CHECK(roberts_variance(m, 1).value == doctest::Approx(m.sigma2_x));
  CHECK(roberts_variance(m, 0.3).kind == VarianceKind::roberts);
}

TEST_CASE("roberts variance equals U-enumeration on random populations") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto pop = oracle::random_population(seed, 1 + seed % 8, 500);
    const auto x = oracle::totals(pop);
    const auto m = compute_moments(pop);
    for (int k = 0; k <= 10; ++k) {
      const double pi = k / 10.0;
      CHECK(oracle::close_rel(roberts_variance(m, pi).value, enumerated_var_y(x, pi), 1e-10,
                              1e-12 * m.mu_x2));
    }
  }
}

TEST_CASE("total variance and expected mean") {
  const auto m = compute_moments(oracle::one_line({10, 20}));
  const auto t = total_variance(m, 0.5);
  CHECK(t.value == doctest::Approx(68.75));
  REQUIRE(t.expected_mean);
  CHECK(*t.expected_mean == doctest::Approx(7.5));
  const auto [mean, var] = enumerated_total({10, 20}, 0.5);
  CHECK(*t.expected_mean == doctest::Approx(mean));
  CHECK(t.value == doctest::Approx(var));
  CHECK(total_variance(m, 0).value == 0);
}

TEST_CASE("roberts never exceeds total variance") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto m = compute_moments(oracle::random_population(seed, 2 + seed * 3, 1000));
    for (int k = 0; k <= 100; ++k) {
      const double pi = k / 100.0;
      CHECK(roberts_variance(m, pi).value <= total_variance(m, pi).value * (1 + 1e-12) + 1e-12);
    }
  }
}

TEST_CASE("pi_crit closed form against grid argmax") {
  const auto m = compute_moments(oracle::one_line({1, 2, 3}));
  const auto c = pi_crit(m);
  REQUIRE(c.value);
  CHECK(*c.value == doctest::Approx(7.0 / 11));
  CHECK(c.interior);
  const double grid = oracle::grid_argmax([&](double p) { return roberts_variance(m, p).value; }, 0, 1, 1e-4);
  CHECK(std::abs(grid - *c.value) <= 1e-4);
  REQUIRE(c.large_n_approx);
  CHECK(*c.large_n_approx == doctest::Approx(m.mu_x2 / (2 * m.mu_x * m.mu_x)));

  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto mm = compute_moments(oracle::random_population(seed, 5 + seed, 300));
    const auto cc = pi_crit(mm);
    REQUIRE(cc.value);
    if (!cc.interior) continue;
    const double g = oracle::grid_argmax([&](double p) { return roberts_variance(mm, p).value; }, 0, 1, 1e-4);
    CHECK(std::abs(g - *cc.value) <= 1e-4);
  }
}

TEST_CASE("pi_crit degenerate denominator") {
  // N = 1: mu^2 = mu2 / N.
  const auto m = compute_moments(oracle::one_line({5}));
  CHECK_FALSE(pi_crit(m).value);
}

TEST_CASE("conservative all-or-nothing variance") {
  const auto m = compute_moments(oracle::one_line({1, 2, 3}));
  const auto v = conservative_variance_aon(m);
  CHECK(v.conservative);
  CHECK(v.at_pi == doctest::Approx(7.0 / 11));
  CHECK(v.value == doctest::Approx(roberts_variance(m, 7.0 / 11).value));
  CHECK(v.value > m.sigma2_x);
  for (int k = 0; k <= 1000; ++k) CHECK(v.value >= roberts_variance(m, k / 1000.0).value);

  const auto constant = compute_moments(oracle::one_line({4, 4, 4}));
  CHECK(conservative_variance_aon(constant).value >= 0);
  CHECK(roberts_variance(constant, 1).value == doctest::Approx(0));

  // Exterior critical point: pi = 1 governs.
  const auto skewed = compute_moments(oracle::one_line({1, 1, 1, 1, 1, 1, 1, 1, 1, 200}));
  const auto sc = pi_crit(skewed);
  REQUIRE(sc.value);
  CHECK(*sc.value > 1);
  const auto sv = conservative_variance_aon(skewed);
  CHECK(sv.at_pi == 1);
  CHECK(sv.value == doctest::Approx(skewed.sigma2_x));
}

TEST_CASE("sample size formula against a linear scan") {
  CounterRng rng(31337);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t big_n = 10 + static_cast<std::size_t>(rng.below(20000));
    const double v = 1 + rng.uniform() * 1e5;
    const double conf = 0.8 + rng.uniform() * 0.19;
    const double e = std::sqrt(v) * static_cast<double>(big_n) * (0.01 + rng.uniform() * 0.5);
    PopulationMoments m;
    m.n_pop = big_n;
    VariancePrediction pred;
    pred.value = v;
    const auto plan = sample_size(m, pred, e, conf, Estimator::simple_expansion);
    const std::size_t scan = std::max<std::size_t>(2, scan_sample_size(big_n, v, e, conf));
    CHECK(plan.n >= 2);
    CHECK(plan.n <= big_n);
    CHECK(achieved_margin(big_n, v, plan.n, conf) <= e * (1 + 1e-12));
    CHECK(plan.n == scan);
  }
}

TEST_CASE("sample size edge cases") {
  PopulationMoments m;
  m.n_pop = 10000;
  VariancePrediction zero;
  const auto p0 = sample_size(m, zero, 5000, 0.95, Estimator::ratio);
  CHECK(p0.unclamped == 0);
  CHECK(p0.n == 2);
  CHECK(p0.estimator == Estimator::ratio);

  VariancePrediction v;
  v.value = 2500;
  const auto p = sample_size(m, v, 5000, 0.95, Estimator::simple_expansion);
  CHECK(p.n == scan_sample_size(10000, 2500, 5000, 0.95));
  const double z = two_sided_z(0.95);
  const auto big = sample_size(m, v, z * 10000 * 50, 0.95, Estimator::simple_expansion);
  CHECK(big.n == 2);
  const auto census = sample_size(m, v, 1e-6, 0.95, Estimator::simple_expansion);
  CHECK(census.n == 10000);
  CHECK(census.census_required);

  CHECK_THROWS_AS(sample_size(m, v, 0, 0.95, Estimator::ratio), ValidationError);
  CHECK_THROWS_AS(sample_size(m, v, 10, 0.4, Estimator::ratio), ValidationError);
  CHECK_THROWS_AS(sample_size(m, v, 10, 1.0, Estimator::ratio), ValidationError);
}

TEST_CASE("sample size is monotone in margin, variance and confidence") {
  PopulationMoments m;
  m.n_pop = 5000;
  std::size_t prev = 5000;
  VariancePrediction v;
  v.value = 400;
  for (double e = 1000; e < 200000; e *= 1.3) {
    const auto n = sample_size(m, v, e, 0.9, Estimator::simple_expansion).n;
    CHECK(n <= prev);
    prev = n;
  }
  prev = 0;
  for (double var = 1; var < 1e5; var *= 1.7) {
    v.value = var;
    const auto n = sample_size(m, v, 20000, 0.9, Estimator::simple_expansion).n;
    CHECK(n >= prev);
    prev = n;
  }
  prev = 0;
  v.value = 400;
  for (double c = 0.55; c < 0.999; c += 0.01) {
    const auto n = sample_size(m, v, 20000, c, Estimator::simple_expansion).n;
    CHECK(n >= prev);
    prev = n;
  }
}
