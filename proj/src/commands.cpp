#include "toff/commands.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "toff/error.hpp"
#include "toff/optimizer.hpp"
#include "toff/renewal.hpp"
#include "toff/report.hpp"
#include "toff/scenario_file.hpp"
#include "toff/simulator.hpp"
#include "toff/trace.hpp"

namespace toff {
namespace {

// Validation rows whose relative error must stay under this bound.
constexpr double kAgreementBound = 0.01;

struct CommonOptions {
  std::string scenario;
  std::string output;
  std::string format = "text";
};

struct SimOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> replications;
  std::optional<std::string> mode;
  std::optional<unsigned> threads;
};

struct ThresholdOverride {
  std::optional<double> mean;
  std::optional<double> rate;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool needs_scenario = true) {
  auto* s = cmd->add_option("--scenario", o.scenario, "Scenario file");
  if (needs_scenario) s->required();
  cmd->add_option("--output", o.output, "Write results to this file instead of stdout");
  cmd->add_option("--format", o.format, "text | csv | structured")
      ->check(CLI::IsMember({"text", "csv", "structured", "json"}));
}

void add_sim(CLI::App* cmd, SimOptions& o) {
  cmd->add_option("--seed", o.seed, "Random seed (overrides the scenario)");
  cmd->add_option("--replications", o.replications, "Simulated sessions (overrides the scenario)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--mode", o.mode, "Handover counting: paper | flowchart")
      ->check(CLI::IsMember({"paper", "flowchart"}));
  cmd->add_option("--threads", o.threads, "Worker threads, 0 = all cores");
}

void add_threshold(CLI::App* cmd, ThresholdOverride& o) {
  auto* mean = cmd->add_option("--threshold-mean", o.mean, "Mean threshold in seconds")
                   ->check(CLI::PositiveNumber);
  cmd->add_option("--threshold-rate", o.rate, "Threshold rate in 1/s")
      ->check(CLI::PositiveNumber)
      ->excludes(mean);
}

ScenarioParams resolve_params(const Scenario& s, const ThresholdOverride& o) {
  if (o.rate) return s.params_at(*o.rate);
  if (o.mean) return s.params_at(1.0 / *o.mean);
  return s.params();
}

// Largest divisor of `replications` not above `requested`.
std::uint64_t fit_batches(std::uint64_t replications, std::uint64_t requested) {
  for (std::uint64_t b = std::min(requested, replications); b > 1; --b) {
    if (replications % b == 0) return b;
  }
  return 1;
}

SimConfig resolve_sim(const Scenario& s, const SimOptions& o) {
  SimConfig cfg = s.simulation;
  if (o.seed) cfg.seed = *o.seed;
  if (o.replications) cfg.replications = *o.replications;
  if (o.mode) cfg.counting_mode = parse_counting_mode(*o.mode);
  if (o.threads) cfg.threads = *o.threads;
  cfg.batch_count = fit_batches(cfg.replications, cfg.batch_count);
  cfg.validate();
  return cfg;
}

void emit(const ResultTable& table, const CommonOptions& o, std::ostream& out) {
  const OutputFormat format = parse_output_format(o.format);
  if (o.output.empty()) {
    write_table(table, format, out);
    return;
  }
  std::ofstream file(o.output, std::ios::binary);
  if (!file) throw DomainError("cannot open output file '" + o.output + "'");
  write_table(table, format, file);
  if (!file) throw DomainError("failed writing output file '" + o.output + "'");
}

std::string num(double x) { return format_number(x, kSignificant10); }

void add_sim_metadata(ResultTable& t, const SimConfig& cfg) {
  t.metadata.emplace_back("replications", std::to_string(cfg.replications));
  t.metadata.emplace_back("seed", std::to_string(cfg.seed));
  t.metadata.emplace_back("counting_mode", std::string(to_string(cfg.counting_mode)));
  t.metadata.emplace_back("batch_count", std::to_string(cfg.batch_count));
}

void add_params_metadata(ResultTable& t, const ScenarioParams& p) {
  t.metadata.emplace_back("session_mean_seconds", num(1.0 / p.session_rate));
  t.metadata.emplace_back("macro", std::string(to_string(p.macro.family())) + " mean " +
                                       num(p.macro.mean()) + " s, variance " +
                                       num(p.macro.variance()) + " s^2");
  t.metadata.emplace_back("femto", std::string(to_string(p.femto.family())) + " mean " +
                                       num(p.femto.mean()) + " s, variance " +
                                       num(p.femto.variance()) + " s^2");
  t.metadata.emplace_back("threshold_mean_seconds", num(1.0 / p.threshold_rate));
}

ResultTable analyze_table(const ScenarioParams& p) {
  const AnalyticReport r = analyze(p);
  ResultTable t;
  t.title = "Analytic report";
  t.columns = {{"quantity", "", kSignificant10},
               {"value", "", kSignificant10},
               {"unit", "", kSignificant10}};
  add_params_metadata(t, p);
  const auto row = [&t](const std::string& name, double v, const std::string& unit) {
    t.add_row({name, v, unit});
  };
  row("prob_case1", r.prob_case1, "");
  row("prob_case2", r.prob_case2, "");
  row("alpha", r.alpha, "");
  row("beta", r.beta, "");
  row("tau", r.tau, "s");
  row("sigma", r.sigma, "s");
  row("xi", r.xi, "s");
  row("phi", r.phi, "s");
  row("rho", r.rho, "s");
  row("crossing_ratio", r.crossing_ratio, "");
  row("x1", r.x1, "");
  row("x2", r.x2, "");
  row("x3", r.x3, "");
  row("y1", r.y1, "s");
  row("y2", r.y2, "s");
  row("e_nb", r.e_nb, "handovers");
  row("e_nt", r.e_nt, "handovers");
  row("e_tb", r.e_tb, "s");
  row("e_tt", r.e_tt, "s");
  row("theta", r.theta, "");
  row("lambda", r.lambda, "");
  row("theta_closed_form", r.theta_closed_form, "");
  row("lambda_closed_form", r.lambda_closed_form, "");
  row("zero_crossing_offload", r.zero_crossing_offload, "s");
  const auto cases = [&row](const std::string& prefix, const CaseValues& c, const std::string& unit) {
    row(prefix + ".case_1_1", c.case_1_1, unit);
    row(prefix + ".case_1_2", c.case_1_2, unit);
    row(prefix + ".case_2_1", c.case_2_1, unit);
    row(prefix + ".case_2_2", c.case_2_2, unit);
  };
  cases("e_nt", r.handovers_to, "handovers");
  cases("e_tb", r.offload_baseline, "s");
  cases("e_tt", r.offload_to, "s");
  t.notes = r.warnings;
  return t;
}

int cmd_analyze(const CommonOptions& c, const ThresholdOverride& th, std::ostream& out,
                std::ostream& err) {
  const Scenario s = load_scenario(c.scenario);
  const ResultTable t = analyze_table(resolve_params(s, th));
  for (const std::string& w : t.notes) err << "warning: " << w << '\n';
  emit(t, c, out);
  return kExitOk;
}

int cmd_validate(const CommonOptions& c, const SimOptions& so, const ThresholdOverride& th,
                 std::ostream& out, std::ostream& err) {
  const Scenario s = load_scenario(c.scenario);
  const ScenarioParams p = resolve_params(s, th);
  const SimConfig cfg = resolve_sim(s, so);
  const AnalyticReport a = analyze(p);
  const MonteCarloResult m = run_monte_carlo(p, cfg);

  ResultTable t;
  t.title = "Analytic vs simulated";
  t.columns = {{"metric", ""},
               {"analytic", ""},
               {"simulated", ""},
               {"ci_halfwidth", ""},
               {"error_percent", "%"},
               {"checked", ""}};
  add_params_metadata(t, p);
  add_sim_metadata(t, cfg);
  bool breach = false;
  const auto row = [&](const std::string& name, double analytic, const SimEstimate& e, bool checked) {
    const double rel = relative_error(analytic, e.mean);
    if (checked && !(rel < kAgreementBound)) breach = true;
    t.add_row({name, analytic, e.mean, e.ci_halfwidth, 100.0 * rel, std::string(checked ? "yes" : "no")});
  };
  row("e_nb", a.e_nb, m.e_nb, false);
  row("e_nt", a.e_nt, m.e_nt, true);
  row("e_tb", a.e_tb, m.e_tb, false);
  row("e_tt", a.e_tt, m.e_tt, true);
  row("theta", a.theta, m.theta, true);
  row("lambda", a.lambda, m.lambda, true);
  t.notes = a.warnings;
  if (cfg.counting_mode == CountingMode::Flowchart) {
    t.notes.emplace_back("flowchart counting is compared against the paper-mode analytics");
  }
  if (breach) t.notes.emplace_back("relative error of at least 1% on a checked metric");
  emit(t, c, out);
  if (breach) err << "validation: relative error of at least 1% on a checked metric\n";
  return breach ? kExitValidationBreach : kExitOk;
}

struct SweepOptions {
  std::string axis;
  double from = 0.0;
  double to = 0.0;
  unsigned points = 0;
  bool log = false;
  bool simulate = false;
};

int cmd_sweep(const CommonOptions& c, const SimOptions& so, const ThresholdOverride& th,
              const SweepOptions& sw, std::ostream& out, std::ostream& err) {
  if (sw.points < 1) throw DomainError("--points must be >= 1");
  if (!(sw.from > 0.0) || !(sw.to > 0.0) || !std::isfinite(sw.from) || !std::isfinite(sw.to)) {
    throw DomainError("sweep range must be positive and finite");
  }
  if (sw.from > sw.to) throw DomainError("sweep range is empty: --from exceeds --to");
  if (sw.points == 1 && sw.from != sw.to) {
    throw DomainError("a single-point sweep needs --from equal to --to");
  }
  if (sw.points > 1 && sw.from == sw.to) throw DomainError("sweep range is empty: --from equals --to");

  const Scenario s = load_scenario(c.scenario);
  std::optional<SimConfig> cfg;
  if (sw.simulate) cfg = resolve_sim(s, so);

  // Base parameters: the threshold is only needed when it is not the axis.
  ScenarioParams base = sw.axis == "threshold_mean" ? s.params_at(1.0) : resolve_params(s, th);
  if (sw.axis == "femto_variance" && base.femto.family() == Family::Exponential) {
    throw DomainError("femto_variance sweep needs a gamma femto law");
  }
  const std::function<void(ScenarioParams&, double)> apply = [&]() -> std::function<void(ScenarioParams&, double)> {
    if (sw.axis == "femto_mean") {
      return [](ScenarioParams& p, double x) {
        p.femto = ResidenceLaw::from_moments(p.femto.family(), x, p.femto.variance());
      };
    }
    if (sw.axis == "femto_variance") {
      return [](ScenarioParams& p, double x) { p.femto = ResidenceLaw::gamma(p.femto.mean(), x); };
    }
    if (sw.axis == "session_mean") {
      return [](ScenarioParams& p, double x) { p.session_rate = 1.0 / x; };
    }
    return [](ScenarioParams& p, double x) { p.threshold_rate = 1.0 / x; };
  }();
  const std::string unit = sw.axis == "femto_variance" ? "s^2" : "s";

  ResultTable t;
  t.title = "Sweep over " + sw.axis;
  t.columns = {{sw.axis, unit, kSignificant10}, {"theta", ""},  {"lambda", ""},
               {"objective", ""},                {"e_nt", "handovers"}, {"e_tt", "s"},
               {"e_tb", "s"}};
  if (cfg) {
    for (const char* name : {"theta_sim", "theta_ci", "lambda_sim", "lambda_ci"}) {
      t.columns.push_back({name, ""});
    }
    add_sim_metadata(t, *cfg);
  }
  t.metadata.emplace_back("axis", sw.axis);
  t.metadata.emplace_back("spacing", sw.log ? "log" : "linear");

  for (unsigned i = 0; i < sw.points; ++i) {
    double x = sw.from;
    if (sw.points > 1) {
      const double f = static_cast<double>(i) / (sw.points - 1);
      x = sw.log ? std::exp(std::log(sw.from) + f * (std::log(sw.to) - std::log(sw.from)))
                 : sw.from + f * (sw.to - sw.from);
      if (i + 1 == sw.points) x = sw.to;
    }
    ScenarioParams p = base;
    apply(p, x);
    const AnalyticReport r = analyze(p);
    for (const std::string& w : r.warnings) t.notes.push_back(sw.axis + " = " + num(x) + ": " + w);
    std::vector<Cell> row{x, r.theta, r.lambda, r.theta + r.lambda, r.e_nt, r.e_tt, r.e_tb};
    if (cfg) {
      const MonteCarloResult m = run_monte_carlo(p, *cfg);
      row.insert(row.end(), {m.theta.mean, m.theta.ci_halfwidth, m.lambda.mean, m.lambda.ci_halfwidth});
    }
    t.add_row(std::move(row));
  }
  for (const std::string& n : t.notes) err << "warning: " << n << '\n';
  emit(t, c, out);
  return kExitOk;
}

int cmd_optimize(const CommonOptions& c, std::optional<unsigned> profile, std::ostream& out) {
  const Scenario s = load_scenario(c.scenario);
  const ScenarioParams p = s.params_at(s.threshold_mean ? 1.0 / *s.threshold_mean : 1.0);
  const OptimizerConfig cfg = s.optimizer();

  ResultTable t;
  t.metadata.emplace_back("delta_per_second", num(cfg.delta));
  t.metadata.emplace_back("min_threshold_mean_seconds", num(1.0 / cfg.delta));
  t.metadata.emplace_back("epsilon_per_second", num(cfg.epsilon_rate));
  t.metadata.emplace_back("grid_points", std::to_string(cfg.grid_points));
  t.metadata.emplace_back("tolerance", num(cfg.tolerance));

  if (profile) {
    t.title = "Objective profile";
    t.columns = {{"eta_o", "1/s", kSignificant10},
                 {"expected_threshold", "s", kSignificant10},
                 {"theta", ""},
                 {"lambda", ""},
                 {"objective", ""}};
    for (const ObjectivePoint& pt : objective_profile(p, cfg, *profile)) {
      t.add_row({pt.eta_o, 1.0 / pt.eta_o, pt.theta, pt.lambda, pt.objective});
    }
    emit(t, c, out);
    return kExitOk;
  }

  const Optimum o = find_optimal(p, cfg);
  t.title = "Optimal offloading threshold";
  t.columns = {{"quantity", "", kSignificant10},
               {"value", "", kSignificant10},
               {"unit", "", kSignificant10}};
  t.add_row({std::string("eta_o_star"), o.eta_o_star, std::string("1/s")});
  t.add_row({std::string("expected_threshold_star"), o.expected_threshold_star, std::string("s")});
  t.add_row({std::string("theta_at"), o.theta_at, std::string("")});
  t.add_row({std::string("lambda_at"), o.lambda_at, std::string("")});
  t.add_row({std::string("objective_value"), o.objective_value, std::string("")});
  t.add_row({std::string("boundary_hit"), std::string(to_string(o.boundary_hit)), std::string("")});
  emit(t, c, out);
  return kExitOk;
}

int cmd_estimate(const CommonOptions& c, const std::string& trace_path, std::ostream& out,
                 std::ostream& err) {
  std::ifstream in(trace_path);
  if (!in) throw ParseError(0, "cannot open trace file '" + trace_path + "'");
  const TraceEstimate e = estimate_from_trace(parse_trace(in));

  ResultTable t;
  t.title = "Residence and session estimates";
  t.columns = {{"quantity", ""},
               {"mean", "s"},
               {"std_error", "s"},
               {"variance", "s^2"},
               {"samples", ""}};
  t.metadata.emplace_back("sessions", std::to_string(e.sessions));
  const auto row = [&t](const char* name, const MeanEstimate& m) {
    t.add_row({std::string(name), m.mean, m.std_error, m.variance, static_cast<std::int64_t>(m.samples)});
  };
  row("femto_residence", e.femto);
  row("macro_residence", e.macro);
  row("session", e.session);
  t.notes = e.notes;

  if (std::isfinite(e.femto.mean) && std::isfinite(e.macro.mean)) {
    const auto law = [](const MeanEstimate& m) {
      return std::isfinite(m.variance) ? ResidenceLaw::gamma(m.mean, m.variance)
                                       : ResidenceLaw::exponential(m.mean);
    };
    t.attachment_name = "scenario_fragment";
    t.attachment = scenario_text(e.session.mean, law(e.macro), law(e.femto));
  }
  for (const std::string& n : e.notes) err << "warning: " << n << '\n';
  emit(t, c, out);
  return kExitOk;
}

int cmd_trace(const CommonOptions& c, const SimOptions& so, std::uint64_t sessions, std::ostream& out) {
  const Scenario s = load_scenario(c.scenario);
  const ScenarioParams p = s.params_at(s.threshold_mean ? 1.0 / *s.threshold_mean : 1.0);
  const std::uint64_t seed = so.seed ? *so.seed : s.simulation.seed;
  if (c.output.empty()) {
    write_synthetic_trace(p, sessions, seed, out);
    return kExitOk;
  }
  std::ofstream file(c.output, std::ios::binary);
  if (!file) throw DomainError("cannot open output file '" + c.output + "'");
  write_synthetic_trace(p, sessions, seed, file);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Threshold offloading analysis, simulation and optimization", "toffload"};
  app.require_subcommand(1);

  CommonOptions analyze_opts, validate_opts, sweep_opts, optimize_opts, estimate_opts, trace_opts;
  SimOptions validate_sim, sweep_sim, trace_sim;
  ThresholdOverride analyze_th, validate_th, sweep_th;
  SweepOptions sweep;
  std::optional<unsigned> profile_points;
  std::string trace_path;
  std::uint64_t trace_sessions = 10000;

  auto* analyze = app.add_subcommand("analyze", "Evaluate the renewal model");
  add_common(analyze, analyze_opts);
  add_threshold(analyze, analyze_th);

  auto* validate = app.add_subcommand("validate", "Compare analytics with Monte Carlo");
  add_common(validate, validate_opts);
  add_sim(validate, validate_sim);
  add_threshold(validate, validate_th);

  auto* sweep_cmd = app.add_subcommand("sweep", "Tabulate metrics over one parameter");
  add_common(sweep_cmd, sweep_opts);
  add_sim(sweep_cmd, sweep_sim);
  add_threshold(sweep_cmd, sweep_th);
  sweep_cmd->add_option("--axis", sweep.axis, "Swept parameter")
      ->required()
      ->check(CLI::IsMember({"femto_mean", "femto_variance", "session_mean", "threshold_mean"}));
  sweep_cmd->add_option("--from", sweep.from, "First axis value")->required();
  sweep_cmd->add_option("--to", sweep.to, "Last axis value")->required();
  sweep_cmd->add_option("--points", sweep.points, "Number of grid points")->required();
  sweep_cmd->add_flag("--log", sweep.log, "Log-spaced grid");
  sweep_cmd->add_flag("--simulate", sweep.simulate, "Add Monte Carlo columns");

  auto* optimize = app.add_subcommand("optimize", "Find the optimal offloading threshold");
  add_common(optimize, optimize_opts);
  optimize->add_option("--profile", profile_points, "Emit an objective profile with this many points")
      ->check(CLI::Range(2u, 10'000'000u));

  auto* estimate = app.add_subcommand("estimate", "Estimate residence means from a trace");
  add_common(estimate, estimate_opts, false);
  estimate->add_option("--trace,trace", trace_path, "Trace CSV (ue_id,event,timestamp_seconds)")
      ->required();

  auto* trace = app.add_subcommand("trace", "Write a synthetic trace sampled from a scenario");
  add_common(trace, trace_opts);
  trace->add_option("--seed", trace_sim.seed, "Random seed (overrides the scenario)");
  trace->add_option("--sessions", trace_sessions, "Number of sessions")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*analyze) return cmd_analyze(analyze_opts, analyze_th, out, err);
    if (*validate) return cmd_validate(validate_opts, validate_sim, validate_th, out, err);
    if (*sweep_cmd) return cmd_sweep(sweep_opts, sweep_sim, sweep_th, sweep, out, err);
    if (*optimize) return cmd_optimize(optimize_opts, profile_points, out);
    if (*estimate) return cmd_estimate(estimate_opts, trace_path, out, err);
    if (*trace) return cmd_trace(trace_opts, trace_sim, trace_sessions, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace toff
