// Acceptance checks. Prints one PASS/FAIL line per criterion; with an integer
// argument runs only that criterion. Exit status is nonzero if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "auditdesign/aon_design.hpp"
#include "auditdesign/cli.hpp"
#include "auditdesign/error.hpp"
#include "auditdesign/montecarlo.hpp"
#include "auditdesign/numerics.hpp"
#include "auditdesign/partial_design.hpp"
#include "auditdesign/ratio_design.hpp"
#include "auditdesign/stratified.hpp"
#include "auditdesign/synthpop.hpp"
#include "oracles.hpp"

using namespace auditdesign;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  bool flagged = false;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double rel_err(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Populations shared by the grid criteria: line-item populations of varied
// sizes plus single-line all-or-nothing ones.
std::vector<ClaimPopulation> random_populations(std::size_t count, std::uint64_t salt) {
  std::vector<ClaimPopulation> out;
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::uint64_t seed = salt * 1000 + k;
    if (k % 2 == 0) {
      out.push_back(oracle::random_line_population(seed, 5 + 7 * k));
    } else {
      out.push_back(oracle::random_population(seed, 5 + 11 * k, 50 + 40 * static_cast<int>(k)));
    }
  }
  return out;
}

// ---------------------------------------------------------------- 1 and 2

OracleSuiteReport& suite_report(double& elapsed) {
  static double time = 0;
  static OracleSuiteReport report = [] {
    Stopwatch w;
    auto r = run_oracle_suite(100, 42, 1);
    time = w.seconds();
    return r;
  }();
  elapsed = time;
  return report;
}

Outcome oracle_y() {
  double t = 0;
  const auto& r = suite_report(t);
  Outcome o;
  o.pass = r.y_failures == 0 && r.max_rel_err_y <= 1e-9 && t < 10;
  o.detail = fmt::format("{} populations, {} grid points, {} mismatches, max rel err {:.2e}, {:.2f} s",
                         r.populations, r.checks, r.y_failures, r.max_rel_err_y, t);
  return o;
}

Outcome oracle_r() {
  double t = 0;
  const auto& r = suite_report(t);
  Outcome o;
  o.pass = r.r_failures == 0 && r.max_rel_err_r <= 1e-9 && t < 10;
  o.detail = fmt::format("{} populations, {} grid points, {} mismatches, max rel err {:.2e}, {:.2f} s",
                         r.populations, r.checks, r.r_failures, r.max_rel_err_r, t);
  return o;
}

// ---------------------------------------------------------------- 3

Outcome reductions() {
  double worst_y = 0, worst_r = 0, worst_skew_fit = 0;
  std::size_t bad_y = 0, bad_r = 0, points = 0;
  for (const auto& pop : random_populations(50, 3)) {
    const auto m = compute_moments(pop);
    const auto y = partial_y_coefficients(pop);
    const auto r = partial_r_coefficients(pop);
    const double n = static_cast<double>(m.n_pop);
    const double skew = m.g1_skew * std::pow(m.sigma2_x, 1.5) / (n * m.mu_x);
    for (int k = 0; k <= 100; ++k) {
      const double pi = k / 100.0;
      ++points;
      const double ey = expected_var_y(y, pi, 0).value;
      const double ry = roberts_variance(m, pi).value;
      const double ey_err = rel_err(ey, ry, 1e-12 * m.mu_x2);
      worst_y = std::max(worst_y, ey_err);
      bad_y += ey_err > 1e-9;

      const double er = expected_var_r(r, pi, 0).value;
      const double rr = roberts_ratio_variance(m, pi).value;
      const double er_err = rel_err(er, rr, 1e-12 * m.mu_x2);
      worst_r = std::max(worst_r, er_err);
      bad_r += er_err > 1e-9;
      // The gap is the skew term counted once more in the exact expansion.
      const double predicted_gap = -pi * (1 - pi) * skew;
      worst_skew_fit = std::max(worst_skew_fit, rel_err(er - rr, predicted_gap, 1e-9 * m.mu_x2));
    }
  }
  Outcome o;
  o.pass = bad_y == 0 && bad_r == 0;
  o.detail = fmt::format(
      "{} points; y reduction: {} over tolerance (max rel err {:.2e}); ratio reduction: {} over "
      "tolerance (max rel err {:.2e}); ratio gap equals -pi(1-pi) G1 sigma^3 / (N mu) to {:.2e}",
      points, bad_y, worst_y, bad_r, worst_r, worst_skew_fit);
  return o;
}

// ---------------------------------------------------------------- 4

Outcome ordering() {
  std::size_t violations = 0, points = 0;
  for (const auto& pop : random_populations(50, 4)) {
    const auto m = compute_moments(pop);
    for (int k = 0; k <= 100; ++k) {
      const double pi = k / 100.0;
      ++points;
      const double r = roberts_variance(m, pi).value, t = total_variance(m, pi).value;
      violations += r > t * (1 + 1e-12) + 1e-12 * m.mu_x2;
    }
  }
  std::vector<ClaimPopulation> large;
  large.push_back(generate({SynthKind::edwards, 7, std::nullopt}));
  large.push_back(generate({SynthKind::clinic, 7, 5000}));
  for (std::uint64_t s = 1; s <= 3; ++s) large.push_back(oracle::random_population(s, 5000 + 1000 * s, 2000));
  double worst = 0;
  for (const auto& pop : large) {
    const auto m = compute_moments(pop);
    const double t = total_variance(m, 0.5).value;
    worst = std::max(worst, std::abs(t - roberts_variance(m, 0.5).value) / t);
  }
  Outcome o;
  o.pass = violations == 0 && worst <= 0.01;
  o.detail = fmt::format("{} grid points, {} ordering violations; {} populations with N >= 5000, max "
                         "relative gap at pi=0.5 {:.2e}",
                         points, violations, large.size(), worst);
  return o;
}

// ---------------------------------------------------------------- 5

Outcome critical_rate() {
  double worst = 0;
  for (const auto& pop : random_populations(50, 5)) {
    const auto m = compute_moments(pop);
    const auto c = pi_crit(m);
    if (!c.value) continue;
    const double closed = std::clamp(*c.value, 0.0, 1.0);
    const double grid =
        oracle::grid_argmax([&](double p) { return roberts_variance(m, p).value; }, 0, 1, 1e-4);
    worst = std::max(worst, std::abs(grid - closed));
  }
  const auto ed = pi_crit(compute_moments(generate({SynthKind::edwards, 7, std::nullopt})));
  const auto ne = pi_crit(compute_moments(generate({SynthKind::neter, 7, std::nullopt})));
  const auto ne_cons = conservative_variance_aon(compute_moments(generate({SynthKind::neter, 7, std::nullopt})));
  Outcome o;
  o.pass = worst <= 1e-4 && ed.value && *ed.value >= 0.60 && *ed.value <= 0.75 && ne.value && *ne.value > 1 &&
           ne_cons.at_pi == 1;
  o.detail = fmt::format("max |grid - closed form| {:.2e}; edwards pi_crit {:.4f}; neter pi_crit {:.4f} "
                         "(conservative at pi={})",
                         worst, ed.value.value_or(NAN), ne.value.value_or(NAN), ne_cons.at_pi);
  return o;
}

// ---------------------------------------------------------------- 6

Outcome dominance() {
  auto pops = random_populations(24, 6);
  pops.push_back(generate({SynthKind::clinic, 7, std::nullopt}));
  pops.push_back(generate({SynthKind::edwards, 7, 2000}));
  std::size_t violations = 0;
  for (const auto& pop : pops) {
    const auto m = compute_moments(pop);
    const auto y = partial_y_coefficients(pop);
    const auto r = partial_r_coefficients(pop);
    const double vy = conservative_variance_partial(y, m).prediction.value;
    const double vr = conservative_variance_ratio(r).prediction.value;
    const double tol = 1e-9 * m.mu_x2;
    for (int i = 0; i <= 40; ++i) {
      for (int j = 0; j <= 40; ++j) {
        violations += expected_var_y(y, i / 40.0, j / 40.0).value > vy + tol;
        violations += expected_var_r(r, i / 40.0, j / 40.0).value > vr + tol;
      }
    }
  }
  const auto clinic = generate({SynthKind::clinic, 7, std::nullopt});
  const auto cm = compute_moments(clinic);
  const auto cr = conservative_variance_ratio(partial_r_coefficients(clinic));
  const auto cy = conservative_variance_partial(partial_y_coefficients(clinic), cm);
  const auto& e = cy.surface.edges;
  const bool pl0_max = std::all_of(e.begin(), e.end(), [&](const auto& x) { return e[2].value >= x.value; }) &&
                       cy.prediction.at_pi_l == 0;
  const bool ratio_at = std::abs(cr.prediction.at_pi - 0.5) < 1e-9 && cr.prediction.at_pi_l == 0;
  Outcome o;
  o.pass = violations == 0 && ratio_at && pl0_max;
  o.detail = fmt::format(
      "{} populations on 41x41 grids, {} violations; clinic ratio maximum at pi={:.4f}, pi_l={:.4f}; clinic "
      "E(sigma_y^2) edges pi=0 {:.1f}, pi=1 {:.1f}, pi_l=0 {:.1f}, pi_l=1 {:.1f}",
      pops.size(), violations, cr.prediction.at_pi, cr.prediction.at_pi_l.value_or(NAN), e[0].value, e[1].value, e[2].value,
      e[3].value);
  return o;
}

// ---------------------------------------------------------------- 7

Outcome preference() {
  Stopwatch w;
  auto pops = random_populations(20, 7);
  pops.push_back(generate({SynthKind::edwards, 7, std::nullopt}));
  pops.push_back(generate({SynthKind::neter, 7, std::nullopt}));
  pops.push_back(generate({SynthKind::clinic, 7, std::nullopt}));
  std::size_t below = 0, checked = 0, bad_limits = 0;
  double lowest = 1;
  for (const auto& pop : pops) {
    const auto m = compute_moments(pop);
    if (m.sigma2_x <= 0) continue;
    const auto groups = distinct_value_groups(pop);
    for (int k = 1; k <= 99; ++k) {
      const double p = preference_probability(groups, m, k / 100.0).prob_ratio_better;
      ++checked;
      below += !(p > 0.5);
      lowest = std::min(lowest, p);
    }
    bad_limits += preference_probability(groups, m, 0).prob_ratio_better != 0.5;
    bad_limits += preference_probability(groups, m, 1).prob_ratio_better != 1.0;
  }

  const auto coarse = coarsen(generate({SynthKind::edwards, 7, std::nullopt}), 20);
  const auto cm = compute_moments(coarse);
  const auto groups = distinct_value_groups(coarse);
  // Error rates where the probability is informative (below 0.999). The
  // standard error uses the larger of the MC and normal binomial spreads so a
  // Monte Carlo estimate of exactly 1 does not give a zero denominator.
  double worst_z = 0, worst_abs = 0;
  std::string per_pi;
  for (double pi : {0.002, 0.005, 0.01, 0.02}) {
    const double normal = preference_probability(groups, cm, pi).prob_ratio_better;
    const double mc = preference_probability_exact(coarse, pi, MonteCarlo{100000, 4}).prob_ratio_better;
    const double se = std::sqrt(std::max(mc * (1 - mc), normal * (1 - normal)) / 100000);
    const double z = std::abs(normal - mc) / se;
    worst_z = std::max(worst_z, z);
    worst_abs = std::max(worst_abs, std::abs(normal - mc));
    per_pi += fmt::format(" pi={} normal {:.4f} MC {:.4f} ({:.1f} SE);", pi, normal, mc, z);
  }
  const double t = w.seconds();
  Outcome o;
  o.pass = below == 0 && bad_limits == 0 && groups.min_count() >= 100 && worst_z <= 3 && t < 60;
  o.detail = fmt::format(
      "{} grid points, {} not above 0.5 (lowest {:.4f}), {} limit errors; coarsened edwards (min N_l {}):{} "
      "worst {:.2f} SE, max abs gap {:.4f}; {:.1f} s",
      checked, below, lowest, bad_limits, groups.min_count(), per_pi, worst_z, worst_abs, t);
  return o;
}

// ---------------------------------------------------------------- 8

Outcome sample_sizes() {
  CounterRng rng(8080);
  std::size_t bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t big_n = 10 + static_cast<std::size_t>(rng.below(50000));
    const double v = 1 + rng.uniform() * 1e6;
    const double conf = 0.8 + rng.uniform() * 0.19;
    const double e = std::sqrt(v) * static_cast<double>(big_n) * (0.005 + rng.uniform() * 0.3);
    PopulationMoments m;
    m.n_pop = big_n;
    VariancePrediction pred;
    pred.value = v;
    const auto plan = sample_size(m, pred, e, conf, Estimator::ratio);
    const auto n = static_cast<std::size_t>(std::ceil(plan.unclamped - 1e-9));
    // Linear scan oracle: smallest n whose achieved margin meets E.
    const double z = two_sided_z(conf);
    std::size_t scan = big_n;
    for (std::size_t k = 1; k <= big_n; ++k) {
      const double kk = static_cast<double>(k), bn = static_cast<double>(big_n);
      if (z * std::sqrt(bn * bn * v / kk * (bn - kk) / (bn - 1)) <= e) {
        scan = k;
        break;
      }
    }
    const bool meets = n >= big_n || achieved_margin(big_n, v, std::max<std::size_t>(n, 1), conf) <= e * (1 + 1e-12);
    const bool tight = n <= 1 || achieved_margin(big_n, v, n - 1, conf) > e * (1 - 1e-12);
    const bool near = (n >= scan ? n - scan : scan - n) <= 1;
    bad += !(meets && tight && near);
  }

  const auto pop = generate({SynthKind::edwards, 7, std::nullopt});
  const auto m = compute_moments(pop);
  std::vector<std::size_t> n(101);
  for (int k = 0; k <= 100; ++k) {
    n[k] = sample_size(m, roberts_ratio_variance(m, k / 100.0), 110000, 0.9, Estimator::ratio).n;
  }
  const auto top = *std::max_element(n.begin(), n.end());
  int first = -1, last = -1;
  for (int k = 0; k <= 100; ++k) {
    if (n[k] == top) {
      if (first < 0) first = k;
      last = k;
    }
  }
  const bool peak = first - 1 <= 50 && 50 <= last + 1;
  Outcome o;
  o.pass = bad == 0 && peak;
  o.detail = fmt::format("1000 tuples, {} disagreements with the scan; ratio curve maximum n={} on pi in "
                         "[{:.2f}, {:.2f}]",
                         bad, top, first / 100.0, last / 100.0);
  return o;
}

// ---------------------------------------------------------------- 9

Outcome coverage() {
  Stopwatch w;
  const auto pop = generate({SynthKind::edwards, 7, std::nullopt});
  const auto m = compute_moments(pop);
  const auto rp = realize(pop, AonModel{0.3}, 9);
  std::vector<CoverageReport> reports;
  reports.push_back(simulate_estimation(
      rp, sample_size(m, roberts_variance(m, 0.3), 110000, 0.9, Estimator::simple_expansion).n,
      Estimator::simple_expansion, 0.9, 2000, 91, 4));
  reports.push_back(simulate_estimation(
      rp, sample_size(m, roberts_ratio_variance(m, 0.3), 110000, 0.9, Estimator::ratio).n, Estimator::ratio,
      0.9, 2000, 92, 4));
  const double t = w.seconds();
  // Skewness above this makes the normal interval unreliable at these n.
  constexpr double kSkewFlag = 2.0;
  Outcome o;
  o.detail = fmt::format("skewness {:.2f};", m.g1_skew);
  for (const auto& r : reports) {
    const bool in = r.attained >= 0.85 && r.attained <= 0.93;
    const bool under = r.attained < 0.85;
    if (under && m.g1_skew > kSkewFlag) {
      o.flagged = true;
    } else if (!in) {
      o.pass = false;
    }
    o.detail += fmt::format(" {} n={} attained {:.4f};", to_string(r.estimator), r.n, r.attained);
  }
  o.pass = o.pass && t < 120;
  o.detail += fmt::format(" {:.1f} s", t);
  return o;
}

// ---------------------------------------------------------------- 10

Outcome invariance() {
  std::size_t differing = 0, cases = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const auto pop = s % 2 ? oracle::random_population(s * 101, 30 + 5 * s, 400)
                           : oracle::random_line_population(s * 101, 30 + 5 * s);
    for (std::size_t strata : {2u, 3u, 4u}) {
      ++cases;
      const auto ref = optimize_breakpoints(pop, strata, Estimator::ratio, AonModel{0.1}, 20).breakpoints;
      for (int k = 2; k <= 9; ++k) {
        if (optimize_breakpoints(pop, strata, Estimator::ratio, AonModel{k / 10.0}, 20).breakpoints != ref) {
          ++differing;
          break;
        }
      }
    }
  }
  const auto counter = oracle::one_line({2, 91, 59, 46, 25, 47, 33});
  std::vector<Cents> seen;
  for (int k = 1; k <= 9; ++k) {
    const auto b = optimize_breakpoints(counter, 2, Estimator::simple_expansion, AonModel{k / 10.0}, 5).breakpoints;
    if (std::find(seen.begin(), seen.end(), b.at(0)) == seen.end()) seen.push_back(b.at(0));
  }
  Outcome o;
  o.pass = differing == 0 && seen.size() > 1;
  o.detail = fmt::format("{} ratio designs, {} with pi-dependent breakpoints; simple expansion counterexample "
                         "has {} distinct breakpoints over pi",
                         cases, differing, seen.size());
  return o;
}

// ---------------------------------------------------------------- 11

struct CliRun {
  int code;
  std::string out;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / fs::path("audit_acceptance_" + std::to_string(std::rand()));
  fs::create_directories(dir);
  const auto file = [&](const std::string& name) { return (dir / name).string(); };
  std::vector<std::string> mismatched;

  const auto sim = [&](const std::string& out) {
    return cli({"simulate", "--kind", "clinic", "--seed", "11", "--out", out}).code;
  };
  bool ok = sim(file("s1.csv")) == 0 && sim(file("s2.csv")) == 0;
  if (slurp(file("s1.csv")) != slurp(file("s2.csv"))) mismatched.push_back("simulate");

  const auto cov = [&](const std::string& workers, const std::string& out) {
    return cli({"coverage", "--claims", file("s1.csv"), "--error-rate", "0.3", "--line-error-rate", "0.2",
                "--sample-size", "80", "--replicates", "500", "--seed", "5", "--workers", workers, "--out", out})
        .code;
  };
  ok = ok && cov("1", file("c1.csv")) == 0 && cov("1", file("c1b.csv")) == 0 && cov("4", file("c4.csv")) == 0;
  const auto c1 = slurp(file("c1.csv"));
  if (c1 != slurp(file("c1b.csv")) || c1 != slurp(file("c4.csv"))) mismatched.push_back("coverage");

  const auto v1 = cli({"verify", "--mini-populations", "40", "--seed", "9", "--workers", "1"});
  const auto v1b = cli({"verify", "--mini-populations", "40", "--seed", "9", "--workers", "1"});
  const auto v3 = cli({"verify", "--mini-populations", "40", "--seed", "9", "--workers", "3"});
  ok = ok && v1.code == 0 && v3.code == 0;
  if (v1.out != v1b.out || v1.out != v3.out) mismatched.push_back("verify");
  fs::remove_all(dir);

  Outcome o;
  o.pass = ok && mismatched.empty() && !c1.empty();
  o.detail = mismatched.empty() ? std::string("simulate, coverage and verify identical across runs and 1/3/4 workers")
                                : fmt::format("{} outputs differ", mismatched.size());
  for (const auto& m : mismatched) o.detail += " " + m;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "oracle equivalence E(sigma_y^2)", oracle_y},
      {2, "oracle equivalence E(sigma_R^2)", oracle_r},
      {3, "reduction identities at pi_l=0", reductions},
      {4, "roberts vs total variance ordering", ordering},
      {5, "critical error rate", critical_rate},
      {6, "conservative dominance", dominance},
      {7, "ratio preference probability", preference},
      {8, "sample size formula", sample_sizes},
      {9, "confidence interval coverage", coverage},
      {10, "stratification pi-invariance", invariance},
      {11, "determinism", determinism},
  };
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  int failures = 0;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = fmt::format("exception: {}", e.what());
    }
    const char* status = o.pass ? (o.flagged ? "PASS (flagged)" : "PASS") : "FAIL";
    fmt::print("C{} {}: {}: {}\n", c.id, status, c.name, o.detail);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
