#include "auditdesign/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "auditdesign/aon_design.hpp"
#include "auditdesign/error.hpp"
#include "auditdesign/montecarlo.hpp"
#include "auditdesign/numerics.hpp"
#include "auditdesign/partial_design.hpp"
#include "auditdesign/ratio_design.hpp"
#include "auditdesign/rng.hpp"
#include "auditdesign/stratified.hpp"
#include "auditdesign/synthpop.hpp"

namespace auditdesign::cli {
namespace {

// Stream keys separating the error realization from the sampling draws.
constexpr std::uint64_t kRealizeStream = 1;
constexpr std::uint64_t kSampleStream = 2;

std::size_t default_workers() {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::string num(double v) { return fmt::format("{:.10g}", v); }

std::string money(double dollars) { return fmt::format("${:.2f}", dollars); }

void check_rate(std::optional<double> rate, std::string_view flag) {
  if (rate && !(*rate >= 0.0 && *rate <= 1.0)) {
    throw ValidationError(fmt::format("{} must lie in [0, 1]", flag));
  }
}

void check_confidence(double c) {
  if (!(c > 0.5 && c < 1.0)) throw ValidationError("--confidence must lie in (0.5, 1)");
}

ErrorModel model_from(double pi, std::optional<double> pi_l) {
  if (pi_l) return LineItemModel{pi, *pi_l};
  return AonModel{pi};
}

// Writes to the file named by `path`, or to `out` when it is empty.
template <typename Writer>
void emit(const std::string& path, std::ostream& out, Writer writer) {
  if (path.empty()) {
    writer(out);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError(fmt::format("cannot open {} for writing", path));
  writer(file);
  if (!file) throw ValidationError(fmt::format("failed writing {}", path));
}

std::vector<double> parse_rate_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw ValidationError(fmt::format("not a number: '{}'", item));
    }
    check_rate(out.back(), "rate");
  }
  return out;
}

// Per-claim variance for one estimator at fixed rates.
VariancePrediction predicted_variance(const ClaimPopulation& pop, const PopulationMoments& m,
                                      Estimator estimator, double pi, std::optional<double> pi_l) {
  if (estimator == Estimator::simple_expansion) {
    if (pi_l) return expected_var_y(partial_y_coefficients(pop), pi, *pi_l);
    return roberts_variance(m, pi);
  }
  if (pi_l) return expected_var_r(partial_r_coefficients(pop), pi, *pi_l);
  return roberts_ratio_variance(m, pi);
}

std::string describe(const VariancePrediction& v) {
  std::string text = fmt::format("{} (pi={}", num(v.value), num(v.at_pi));
  if (v.at_pi_l) text += fmt::format(", pi_l={}", num(*v.at_pi_l));
  text += ")";
  return text;
}

// ---------------------------------------------------------------- moments

struct MomentsOptions {
  std::string claims;
};

int do_moments(const MomentsOptions& o, std::ostream& out) {
  const auto pop = parse_claims_csv(o.claims);
  const auto m = compute_moments(pop);
  const auto groups = distinct_value_groups(pop);
  const auto crit = pi_crit(m);
  fmt::print(out, "claims: {}\n", m.n_pop);
  fmt::print(out, "lines: {}\n", pop.line_count());
  fmt::print(out, "total claimed: {}\n", money(m.tau_x));
  fmt::print(out, "mean: {}\n", num(m.mu_x));
  fmt::print(out, "sd: {}\n", num(m.sigma_x()));
  fmt::print(out, "second moment: {}\n", num(m.mu_x2));
  fmt::print(out, "skewness G1: {}\n", num(m.g1_skew));
  fmt::print(out, "distinct totals: {}\n", groups.groups.size());
  fmt::print(out, "smallest group: {}\n", groups.min_count());
  if (crit.value) {
    fmt::print(out, "pi_crit: {} ({})\n", num(*crit.value), crit.interior ? "interior" : "outside [0, 1]");
  } else {
    fmt::print(out, "pi_crit: undefined\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------- plan

struct PlanOptions {
  std::string claims;
  std::string estimator = "simple";
  std::string margin;
  double confidence = 0.95;
  std::optional<double> error_rate;
  std::optional<double> line_error_rate;
  bool conservative = false;
  std::string model = "line-item";
};

int do_plan(const PlanOptions& o, std::ostream& out) {
  if (o.error_rate && o.conservative) {
    throw ValidationError("--error-rate and --conservative are contradictory");
  }
  if (!o.error_rate && !o.conservative) {
    throw ValidationError("plan needs --error-rate (or --conservative to maximize over it)");
  }
  if (o.line_error_rate && !o.error_rate) {
    throw ValidationError("--line-error-rate requires --error-rate");
  }
  if (o.model != "aon" && o.model != "line-item") {
    throw ValidationError("--model must be aon or line-item");
  }
  check_rate(o.error_rate, "--error-rate");
  check_rate(o.line_error_rate, "--line-error-rate");
  check_confidence(o.confidence);
  const Estimator estimator = parse_estimator(o.estimator);
  const double margin = parse_dollars(o.margin).dollars();

  const auto pop = parse_claims_csv(o.claims);
  const auto m = compute_moments(pop);
  VariancePrediction v;
  if (o.conservative) {
    const bool aon = o.model == "aon";
    if (estimator == Estimator::simple_expansion) {
      v = aon ? conservative_variance_aon(m)
              : conservative_variance_partial(partial_y_coefficients(pop), m).prediction;
    } else {
      v = aon ? conservative_ratio_variance_aon(m)
              : conservative_variance_ratio(partial_r_coefficients(pop)).prediction;
    }
  } else {
    v = predicted_variance(pop, m, estimator, *o.error_rate, o.line_error_rate);
  }
  const auto plan = sample_size(m, v, margin, o.confidence, estimator);
  fmt::print(out, "estimator: {}\n", to_string(estimator));
  fmt::print(out, "claims: {}\n", m.n_pop);
  fmt::print(out, "variance: {}{}\n", describe(v), v.conservative ? " conservative" : "");
  fmt::print(out, "margin: {}\n", money(margin));
  fmt::print(out, "confidence: {}\n", num(o.confidence));
  fmt::print(out, "sample size: {}\n", plan.n);
  fmt::print(out, "formula value: {}\n", num(plan.unclamped));
  fmt::print(out, "achieved margin: {}\n",
             money(achieved_margin(m.n_pop, v.value, plan.n, o.confidence)));
  if (plan.census_required) fmt::print(out, "note: the margin requires a census\n");
  return kExitOk;
}

// ---------------------------------------------------------------- compare

struct CompareOptions {
  std::string claims;
  double error_rate = 0;
  std::string method = "normal";
  std::size_t replicates = 100000;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;
};

int do_compare(const CompareOptions& o, std::ostream& out) {
  check_rate(o.error_rate, "--error-rate");
  const auto pop = parse_claims_csv(o.claims);
  PreferenceReport r;
  if (o.method == "normal") {
    r = preference_probability(distinct_value_groups(pop), compute_moments(pop), o.error_rate);
  } else if (o.method == "exhaustive") {
    r = preference_probability_exact(pop, o.error_rate, Exhaustive{});
  } else if (o.method == "monte-carlo") {
    if (!o.seed) throw ValidationError("--method monte-carlo requires --seed");
    r = preference_probability_exact(
        pop, o.error_rate,
        MonteCarlo{o.replicates, *o.seed, o.workers ? o.workers : default_workers()});
  } else {
    throw ValidationError("--method must be normal, exhaustive or monte-carlo");
  }
  fmt::print(out, "method: {}\n", o.method);
  fmt::print(out, "pi: {}\n", num(o.error_rate));
  fmt::print(out, "prob_ratio_better: {}\n", num(r.prob_ratio_better));
  fmt::print(out, "mean_g: {}\n", num(r.mean_g));
  fmt::print(out, "var_g: {}\n", num(r.var_g));
  if (r.mc_std_err) fmt::print(out, "std_err: {}\n", num(*r.mc_std_err));
  fmt::print(out, "distinct totals: {}\n", r.distinct_values);
  fmt::print(out, "smallest group: {}\n", r.min_group_count);
  if (r.degenerate) fmt::print(out, "note: limit value at the boundary error rate\n");
  return kExitOk;
}

// ---------------------------------------------------------------- conservative

struct ConservativeOptions {
  std::string claims;
};

void print_surface(std::ostream& out, std::string_view title, const ConservativeSurface& s) {
  const auto& sm = s.surface;
  fmt::print(out, "{}\n", title);
  fmt::print(out, "  maximum: {} at pi={}, pi_l={}{}\n", num(sm.value), num(sm.pi), num(sm.pi_l),
             sm.interior ? " (interior)" : "");
  for (const auto& e : sm.edges) {
    fmt::print(out, "  edge {}: {} at pi={}, pi_l={}\n", to_string(e.edge), num(e.value), num(e.pi),
               num(e.pi_l));
  }
  if (sm.degenerate_cubic) fmt::print(out, "  stationary cubic vanishes identically\n");
  for (const auto& c : sm.candidates) {
    fmt::print(out, "  candidate pi_l={} pi={}: {}\n", num(c.pi_l), num(c.pi),
               c.admitted ? fmt::format("admitted, value {}", num(c.value)) : std::string(c.reason));
  }
}

int do_conservative(const ConservativeOptions& o, std::ostream& out) {
  const auto pop = parse_claims_csv(o.claims);
  const auto m = compute_moments(pop);
  print_surface(out, "E(sigma_y^2), simple expansion",
                conservative_variance_partial(partial_y_coefficients(pop), m));
  print_surface(out, "E(sigma_R^2), ratio", conservative_variance_ratio(partial_r_coefficients(pop)));
  const auto aon = conservative_variance_aon(m);
  fmt::print(out, "all-or-nothing simple expansion: {}\n", describe(aon));
  fmt::print(out, "all-or-nothing ratio: {}\n", describe(conservative_ratio_variance_aon(m)));
  return kExitOk;
}

// ---------------------------------------------------------------- stratify

struct StratifyOptions {
  std::string claims;
  std::size_t strata = 2;
  std::string estimator = "ratio";
  double error_rate = 0;
  std::optional<double> line_error_rate;
  std::size_t sample_size = 0;
  std::string allocation = "neyman";
  std::vector<std::string> breakpoints;
  double confidence = 0.95;
};

int do_stratify(const StratifyOptions& o, std::ostream& out) {
  check_rate(o.error_rate, "--error-rate");
  check_rate(o.line_error_rate, "--line-error-rate");
  check_confidence(o.confidence);
  AllocationRule rule;
  if (o.allocation == "neyman") {
    rule = AllocationRule::neyman;
  } else if (o.allocation == "proportional") {
    rule = AllocationRule::proportional;
  } else {
    throw ValidationError("--allocation must be neyman or proportional");
  }
  const Estimator estimator = parse_estimator(o.estimator);
  const ErrorModel model = model_from(o.error_rate, o.line_error_rate);
  const auto pop = parse_claims_csv(o.claims);

  StratificationPlan plan;
  if (!o.breakpoints.empty()) {
    std::vector<Cents> cuts;
    for (const auto& b : o.breakpoints) cuts.push_back(parse_dollars(b));
    plan = allocate(make_plan(pop, cuts, estimator, model), o.sample_size, rule);
  } else {
    plan = optimize_breakpoints(pop, o.strata, estimator, model, o.sample_size, rule);
  }
  fmt::print(out, "estimator: {}\n", to_string(estimator));
  fmt::print(out, "allocation: {}\n", o.allocation);
  fmt::print(out, "stratum,low,high,claims,sample,variance\n");
  for (std::size_t h = 0; h < plan.strata.size(); ++h) {
    const auto& s = plan.strata[h];
    fmt::print(out, "{},{},{},{},{},{}\n", h + 1, format_cents(s.low),
               s.high ? format_cents(*s.high) : std::string("inf"), s.size, s.n,
               num(s.predicted_variance));
  }
  fmt::print(out, "total variance: {}\n", num(plan.total_variance));
  fmt::print(out, "margin at {}: {}\n", num(o.confidence),
             money(two_sided_z(o.confidence) * std::sqrt(plan.total_variance)));
  for (const auto& w : plan.warnings) fmt::print(out, "warning: {}\n", w);
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string kind;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> size;
  std::string out;
};

int do_simulate(const SimulateOptions& o, std::ostream& out) {
  if (!o.seed) throw ValidationError("simulate requires --seed");
  const auto pop = generate({parse_synth_kind(o.kind), *o.seed, o.size});
  emit(o.out, out, [&](std::ostream& os) { write_claims_csv(os, pop); });
  return kExitOk;
}

// ---------------------------------------------------------------- coverage

struct CoverageOptions {
  std::string claims;
  std::string estimator = "both";
  double error_rate = 0;
  std::optional<double> line_error_rate;
  double confidence = 0.95;
  std::optional<std::size_t> sample_size;
  std::string margin;
  std::size_t replicates = 1000;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;
  std::string out;
};

int do_coverage(const CoverageOptions& o, std::ostream& out) {
  if (!o.seed) throw ValidationError("coverage requires --seed");
  check_rate(o.error_rate, "--error-rate");
  check_rate(o.line_error_rate, "--line-error-rate");
  check_confidence(o.confidence);
  if (!o.sample_size && o.margin.empty()) {
    throw ValidationError("coverage needs --sample-size or --margin");
  }
  std::vector<Estimator> estimators;
  if (o.estimator == "both") {
    estimators = {Estimator::simple_expansion, Estimator::ratio};
  } else {
    estimators = {parse_estimator(o.estimator)};
  }
  const auto pop = parse_claims_csv(o.claims);
  const auto m = compute_moments(pop);
  const ErrorModel model = model_from(o.error_rate, o.line_error_rate);
  const auto rp = realize(pop, model, stream_seed(*o.seed, kRealizeStream));
  const std::size_t workers = o.workers ? o.workers : default_workers();

  std::vector<CoverageReport> reports;
  for (Estimator e : estimators) {
    std::size_t n = 0;
    if (o.sample_size) {
      n = *o.sample_size;
    } else {
      const auto v = predicted_variance(pop, m, e, o.error_rate, o.line_error_rate);
      n = sample_size(m, v, parse_dollars(o.margin).dollars(), o.confidence, e).n;
    }
    reports.push_back(simulate_estimation(rp, n, e, o.confidence, o.replicates,
                                          stream_seed(*o.seed, kSampleStream), workers));
  }
  emit(o.out, out, [&](std::ostream& os) {
    fmt::print(os, "estimator,n,pi,pi_l,nominal,attained,rmse\n");
    for (const auto& r : reports) {
      fmt::print(os, "{},{},{},{},{},{},{}\n", to_string(r.estimator), r.n, num(r.pi), num(r.pi_l),
                 num(r.nominal), num(r.attained), num(r.rmse));
    }
  });
  return kExitOk;
}

// ---------------------------------------------------------------- curves

struct CurvesOptions {
  std::string claims;
  std::string kind;
  double confidence = 0.95;
  std::string margin;
  std::optional<double> line_error_rate;
  std::string pi_values = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  std::size_t steps = 100;
  std::string out;
};

int do_curves(const CurvesOptions& o, std::ostream& out) {
  if (o.steps < 1) throw ValidationError("--steps must be positive");
  check_rate(o.line_error_rate, "--line-error-rate");
  const auto pop = parse_claims_csv(o.claims);
  const auto m = compute_moments(pop);
  const auto grid = [&](std::size_t k) {
    return static_cast<double>(k) / static_cast<double>(o.steps);
  };
  std::ostringstream csv;
  if (o.kind == "samplesize") {
    check_confidence(o.confidence);
    if (o.margin.empty()) throw ValidationError("--kind samplesize requires --margin");
    const double margin = parse_dollars(o.margin).dollars();
    fmt::print(csv, "pi,n_simple_expansion,n_ratio\n");
    for (std::size_t k = 0; k <= o.steps; ++k) {
      const double pi = grid(k);
      const auto vs = predicted_variance(pop, m, Estimator::simple_expansion, pi, o.line_error_rate);
      const auto vr = predicted_variance(pop, m, Estimator::ratio, pi, o.line_error_rate);
      fmt::print(csv, "{},{},{}\n", num(pi),
                 sample_size(m, vs, margin, o.confidence, Estimator::simple_expansion).n,
                 sample_size(m, vr, margin, o.confidence, Estimator::ratio).n);
    }
  } else if (o.kind == "preference") {
    const auto groups = distinct_value_groups(pop);
    fmt::print(csv, "pi,prob_ratio_better\n");
    for (std::size_t k = 0; k <= o.steps; ++k) {
      const double pi = grid(k);
      fmt::print(csv, "{},{}\n", num(pi), num(preference_probability(groups, m, pi).prob_ratio_better));
    }
  } else if (o.kind == "cross-sections") {
    const auto y = partial_y_coefficients(pop);
    const auto r = partial_r_coefficients(pop);
    fmt::print(csv, "pi,pi_l,expected_var_y,expected_var_r\n");
    for (double pi : parse_rate_list(o.pi_values)) {
      for (std::size_t k = 0; k <= o.steps; ++k) {
        const double pl = grid(k);
        fmt::print(csv, "{},{},{},{}\n", num(pi), num(pl), num(expected_var_y(y, pi, pl).value),
                   num(expected_var_r(r, pi, pl).value));
      }
    }
  } else {
    throw ValidationError("--kind must be samplesize, preference or cross-sections");
  }
  emit(o.out, out, [&](std::ostream& os) { os << csv.str(); });
  return kExitOk;
}

// ---------------------------------------------------------------- verify

struct VerifyOptions {
  std::size_t populations = 100;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;
};

int do_verify(const VerifyOptions& o, std::ostream& out) {
  if (!o.seed) throw ValidationError("verify requires --seed");
  const auto r = run_oracle_suite(o.populations, *o.seed, o.workers ? o.workers : default_workers());
  fmt::print(out, "mini-populations: {}\n", r.populations);
  fmt::print(out, "grid checks: {}\n", r.checks);
  fmt::print(out, "expected_var_y mismatches: {} (max relative error {:.3e})\n", r.y_failures,
             r.max_rel_err_y);
  fmt::print(out, "expected_var_r mismatches: {} (max relative error {:.3e})\n", r.r_failures,
             r.max_rel_err_r);
  fmt::print(out, "preference mismatches: {} of {}\n", r.preference_failures, r.preference_checks);
  const bool ok = r.y_failures == 0 && r.r_failures == 0 && r.preference_failures == 0;
  fmt::print(out, "result: {}\n", ok ? "PASS" : "FAIL");
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sample size planning for claim audits"};
  app.name("audit-design");
  app.require_subcommand(1);

  MomentsOptions moments;
  auto* c_moments = app.add_subcommand("moments", "Population summary");
  c_moments->add_option("--claims", moments.claims, "Claims CSV")->required();

  PlanOptions plan;
  auto* c_plan = app.add_subcommand("plan", "Sample size for a margin of error");
  c_plan->add_option("--claims", plan.claims, "Claims CSV")->required();
  c_plan->add_option("--estimator", plan.estimator, "simple or ratio");
  c_plan->add_option("--margin", plan.margin, "Margin of error in dollars")->required();
  c_plan->add_option("--confidence", plan.confidence, "Confidence level");
  c_plan->add_option("--error-rate", plan.error_rate, "Claim error rate pi");
  c_plan->add_option("--line-error-rate", plan.line_error_rate, "Line error rate pi_l");
  c_plan->add_flag("--conservative", plan.conservative, "Maximize over the error rates");
  c_plan->add_option("--model", plan.model, "aon or line-item (with --conservative)");

  CompareOptions compare;
  auto* c_compare = app.add_subcommand("compare", "Probability that ratio estimation wins");
  c_compare->add_option("--claims", compare.claims, "Claims CSV")->required();
  c_compare->add_option("--error-rate", compare.error_rate, "Claim error rate pi")->required();
  c_compare->add_option("--method", compare.method, "normal, exhaustive or monte-carlo");
  c_compare->add_option("--replicates", compare.replicates, "Monte Carlo replicates");
  c_compare->add_option("--seed", compare.seed, "Random seed");
  c_compare->add_option("--workers", compare.workers, "Worker threads");

  ConservativeOptions conservative;
  auto* c_conservative =
      app.add_subcommand("conservative", "Maxima of the expected variance surfaces");
  c_conservative->add_option("--claims", conservative.claims, "Claims CSV")->required();

  StratifyOptions stratify;
  auto* c_stratify = app.add_subcommand("stratify", "Stratified design");
  c_stratify->add_option("--claims", stratify.claims, "Claims CSV")->required();
  c_stratify->add_option("--strata", stratify.strata, "Number of strata");
  c_stratify->add_option("--estimator", stratify.estimator, "simple or ratio");
  c_stratify->add_option("--error-rate", stratify.error_rate, "Claim error rate pi")->required();
  c_stratify->add_option("--line-error-rate", stratify.line_error_rate, "Line error rate pi_l");
  c_stratify->add_option("--sample-size", stratify.sample_size, "Total sample size")->required();
  c_stratify->add_option("--allocation", stratify.allocation, "neyman or proportional");
  c_stratify->add_option("--breakpoints", stratify.breakpoints, "Fixed breakpoints in dollars")
      ->delimiter(',');
  c_stratify->add_option("--confidence", stratify.confidence, "Confidence level");

  SimulateOptions simulate;
  auto* c_simulate = app.add_subcommand("simulate", "Write a simulated claims population");
  c_simulate->add_option("--kind", simulate.kind, "edwards, neter or clinic")->required();
  c_simulate->add_option("--seed", simulate.seed, "Random seed");
  c_simulate->add_option("--size", simulate.size, "Number of claims");
  c_simulate->add_option("--out", simulate.out, "Output CSV (default stdout)");

  CoverageOptions coverage;
  auto* c_coverage = app.add_subcommand("coverage", "Confidence interval coverage by simulation");
  c_coverage->add_option("--claims", coverage.claims, "Claims CSV")->required();
  c_coverage->add_option("--estimator", coverage.estimator, "simple, ratio or both");
  c_coverage->add_option("--error-rate", coverage.error_rate, "Claim error rate pi")->required();
  c_coverage->add_option("--line-error-rate", coverage.line_error_rate, "Line error rate pi_l");
  c_coverage->add_option("--confidence", coverage.confidence, "Confidence level");
  c_coverage->add_option("--sample-size", coverage.sample_size, "Sample size");
  c_coverage->add_option("--margin", coverage.margin, "Plan the sample size for this margin");
  c_coverage->add_option("--replicates", coverage.replicates, "Replicates");
  c_coverage->add_option("--seed", coverage.seed, "Random seed");
  c_coverage->add_option("--workers", coverage.workers, "Worker threads");
  c_coverage->add_option("--out", coverage.out, "Output CSV (default stdout)");

  CurvesOptions curves;
  auto* c_curves = app.add_subcommand("curves", "Plot data as CSV");
  c_curves->add_option("--claims", curves.claims, "Claims CSV")->required();
  c_curves->add_option("--kind", curves.kind, "samplesize, preference or cross-sections")
      ->required();
  c_curves->add_option("--confidence", curves.confidence, "Confidence level");
  c_curves->add_option("--margin", curves.margin, "Margin of error in dollars");
  c_curves->add_option("--line-error-rate", curves.line_error_rate,
                       "Line error rate for samplesize curves");
  c_curves->add_option("--pi-values", curves.pi_values, "Cross-section error rates");
  c_curves->add_option("--steps", curves.steps, "Grid intervals on [0, 1]");
  c_curves->add_option("--out", curves.out, "Output CSV (default stdout)");

  VerifyOptions verify;
  auto* c_verify = app.add_subcommand("verify", "Closed forms against exhaustive enumeration");
  c_verify->add_option("--mini-populations", verify.populations, "Number of populations");
  c_verify->add_option("--seed", verify.seed, "Random seed");
  c_verify->add_option("--workers", verify.workers, "Worker threads");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (c_moments->parsed()) return do_moments(moments, out);
    if (c_plan->parsed()) return do_plan(plan, out);
    if (c_compare->parsed()) return do_compare(compare, out);
    if (c_conservative->parsed()) return do_conservative(conservative, out);
    if (c_stratify->parsed()) return do_stratify(stratify, out);
    if (c_simulate->parsed()) return do_simulate(simulate, out);
    if (c_coverage->parsed()) return do_coverage(coverage, out);
    if (c_curves->parsed()) return do_curves(curves, out);
    if (c_verify->parsed()) return do_verify(verify, out);
  } catch (const ValidationError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    fmt::print(err, "internal error: {}\n", e.what());
    return kExitInternal;
  }
  fmt::print(err, "internal error: no subcommand ran\n");
  return kExitInternal;
}

}  // namespace auditdesign::cli
