#include <doctest.h>

#include <cmath>

#include "auditdesign/aon_design.hpp"
#include "auditdesign/error.hpp"
#include "auditdesign/montecarlo.hpp"
#include "auditdesign/partial_design.hpp"
#include "auditdesign/ratio_design.hpp"
#include "auditdesign/synthpop.hpp"
#include "oracles.hpp"

using namespace auditdesign;

TEST_CASE("realization extremes") {
  const auto pop = oracle::random_line_population(12, 50);
  const auto all = realize(pop, AonModel{1}, 3);
  const auto none = realize(pop, LineItemModel{0, 0}, 3);
  const auto lines = realize(pop, LineItemModel{0, 1}, 3);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    CHECK(all.y[i] == pop[i].total());
    CHECK(none.y[i] == Cents{0});
    CHECK(lines.y[i] == pop[i].probable_error_total());
  }
}

TEST_CASE("realization invariants and determinism") {
  const auto pop = oracle::random_line_population(13, 200);
  const auto a = realize(pop, LineItemModel{0.3, 0.4}, 99);
  const auto b = realize(pop, LineItemModel{0.3, 0.4}, 99);
  const auto c = realize(pop, LineItemModel{0.3, 0.4}, 100);
  CHECK(a.y == b.y);
  CHECK(a.y != c.y);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    CHECK(a.y[i].value >= 0);
    CHECK(a.y[i] <= pop[i].total());
  }
  const auto aon = realize(oracle::random_population(4, 300, 90), AonModel{0.4}, 5);
  std::size_t errors = 0;
  for (std::size_t i = 0; i < aon.base.size(); ++i) {
    const bool whole = aon.y[i] == aon.base[i].total();
    CHECK((whole || aon.y[i] == Cents{0}));
    errors += whole;
  }
  CHECK(std::abs(static_cast<double>(errors) / 300 - 0.4) < 0.1);
}

TEST_CASE("census samples always cover") {
  const auto pop = oracle::random_population(21, 40, 100);
  const auto rp = realize(pop, AonModel{0.3}, 1);
  for (Estimator e : {Estimator::simple_expansion, Estimator::ratio}) {
    const auto r = simulate_estimation(rp, 40, e, 0.9, 50, 7);
    CHECK(r.attained == 1);
    CHECK(r.rmse == doctest::Approx(0).scale(1));
  }
}

TEST_CASE("coverage reports are reproducible and worker-independent") {
  const auto pop = generate({SynthKind::edwards, 2, 2000});
  const auto rp = realize(pop, AonModel{0.3}, 8);
  const auto a = simulate_estimation(rp, 80, Estimator::ratio, 0.9, 400, 17, 1);
  const auto b = simulate_estimation(rp, 80, Estimator::ratio, 0.9, 400, 17, 4);
  const auto c = simulate_estimation(rp, 80, Estimator::ratio, 0.9, 400, 17, 1);
  CHECK(a.attained == b.attained);
  CHECK(a.rmse == b.rmse);
  CHECK(a.mean_margin == b.mean_margin);
  CHECK(a.rmse == c.rmse);
  CHECK(a.n == 80);
  CHECK(a.nominal == 0.9);
  CHECK(a.pi == doctest::Approx(0.3));
  CHECK(a.attained > 0.75);
  CHECK(a.attained <= 1);
}

TEST_CASE("all-zero realizations give zero-width intervals that cover") {
  const auto pop = oracle::random_population(3, 30, 100);
  const auto rp = realize(pop, AonModel{0}, 1);
  const auto r = simulate_estimation(rp, 5, Estimator::simple_expansion, 0.95, 30, 2);
  CHECK(r.attained == 1);
  CHECK(r.mean_margin == 0);
}

TEST_CASE("coverage input validation") {
  const auto rp = realize(oracle::random_population(3, 30, 100), AonModel{0.2}, 1);
  CHECK_THROWS_AS(simulate_estimation(rp, 1, Estimator::ratio, 0.9, 10, 1), ValidationError);
  CHECK_THROWS_AS(simulate_estimation(rp, 31, Estimator::ratio, 0.9, 10, 1), ValidationError);
}

TEST_CASE("oracle expectations: worksheet values") {
  const auto pop = oracle::one_line({10, 20});
  const auto e = oracle_expectations(pop, 0.5, 0);
  CHECK(e.e_sigma_y2 == doctest::Approx(37.5));
  CHECK(e.e_sigma_r2 == doctest::Approx(200.0 / 9));
  CHECK(e.p_g_positive == doctest::Approx(0.5));

  const auto zero = oracle_expectations(pop, 0, 0);
  CHECK(zero.e_sigma_y2 == 0);
  CHECK(zero.e_sigma_r2 == 0);
  CHECK(zero.p_g_positive == 0);

  const auto one = oracle_expectations(pop, 1, 0.3);
  CHECK(one.e_sigma_y2 == doctest::Approx(25));
  CHECK(one.e_sigma_r2 == doctest::Approx(0).scale(1));
  CHECK(one.p_g_positive == 1);
}

TEST_CASE("oracle caps") {
  CHECK_THROWS_AS(oracle_expectations(oracle::one_line({1, 2, 3, 4, 5}), 0.5, 0.5), ValidationError);
  CHECK_THROWS_AS(oracle_expectations(oracle::lines({{{1, 1}, {1, 1}, {1, 1}}, {{1, 1}, {1, 1}, {1, 1}},
                                                     {{1, 1}, {1, 1}, {1, 1}}}),
                                      0.5, 0.5),
                  ValidationError);
}

TEST_CASE("mini-populations respect the caps") {
  for (std::uint64_t k = 0; k < 300; ++k) {
    const auto pop = random_mini_population(42, k);
    CHECK(pop.size() >= 1);
    CHECK(pop.size() <= 4);
    CHECK(pop.line_count() <= 8);
    for (const auto& c : pop.claims()) {
      CHECK(c.lines.size() >= 1);
      CHECK(c.lines.size() <= 3);
      for (const auto& l : c.lines) {
        CHECK(l.claimed.value % 100 == 0);
        CHECK(l.claimed.value >= 100);
        CHECK(l.claimed.value <= 10000);
      }
    }
  }
}

TEST_CASE("closed forms agree with the oracle on the mini-population suite") {
  const auto r = run_oracle_suite(100, 42, 2);
  CHECK(r.checks == 2500);
  CHECK(r.y_failures == 0);
  CHECK(r.r_failures == 0);
  CHECK(r.preference_failures == 0);
  CHECK(r.max_rel_err_y < 1e-9);
  CHECK(r.max_rel_err_r < 1e-9);
  const auto again = run_oracle_suite(100, 42, 5);
  CHECK(again.max_rel_err_y == r.max_rel_err_y);
}

TEST_CASE("oracle expectations agree with the all-or-nothing formulas") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto pop = oracle::random_population(seed, 1 + seed % 4, 80);
    const auto m = compute_moments(pop);
    for (double pi : {0.1, 0.5, 0.7}) {
      const auto e = oracle_expectations(pop, pi, 0);
      CHECK(e.e_sigma_y2 == doctest::Approx(roberts_variance(m, pi).value).scale(m.mu_x2));
      CHECK(e.p_g_positive ==
            doctest::Approx(preference_probability_exact(pop, pi, Exhaustive{}).prob_ratio_better));
    }
  }
}
