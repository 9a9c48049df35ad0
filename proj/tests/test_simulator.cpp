#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "support.hpp"
#include "toff/error.hpp"
#include "toff/renewal.hpp"
#include "toff/simulator.hpp"

using namespace toff;
using toff::testing::rel_diff;
using toff::testing::reference_scenario;

namespace {

SessionPath make_path(StartCell start, double length, std::vector<double> crossings,
                      std::vector<double> thresholds) {
  return SessionPath{start, length, std::move(crossings), std::move(thresholds)};
}

bool within(double analytic, const SimEstimate& e, double n_se = 3.0) {
  return std::abs(e.mean - analytic) <= n_se * e.std_error;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_SUITE("session_simulator") {

TEST_CASE("session that ends before leaving the macrocell") {
  const SessionOutcome o = tally(make_path(StartCell::Macro, 5.0, {}, {}), CountingMode::Paper);
  CHECK(o.n_handover_baseline == 0);
  CHECK(o.n_handover_to == 0);
  CHECK(o.t_offload_baseline == 0.0);
  CHECK(o.t_offload_to == 0.0);
  CHECK(o.case_label == SessionCase::ZeroCrossing);
}

TEST_CASE("session that ends before leaving the start femtocell") {
  const SessionOutcome o = tally(make_path(StartCell::Femto, 5.0, {}, {}), CountingMode::Paper);
  CHECK(o.n_handover_baseline == 0);
  CHECK(o.n_handover_to == 0);
  CHECK(o.t_offload_baseline == 5.0);
  CHECK(o.t_offload_to == 5.0);
  CHECK(o.case_label == SessionCase::ZeroCrossing);
  CHECK(to_string(o.case_label) == "degenerate-0-crossing");
}

TEST_CASE("one completed femto visit with an expired threshold") {
  // Enters at 10, leaves at 70 (L = 60), threshold 15, session ends at 100.
  const SessionOutcome o =
      tally(make_path(StartCell::Macro, 100.0, {10.0, 70.0}, {15.0}), CountingMode::Paper);
  CHECK(o.n_handover_baseline == 2);
  CHECK(o.n_handover_to == 2);
  CHECK(o.t_offload_baseline == 60.0);
  CHECK(o.t_offload_to == 45.0);
  CHECK(o.case_label == SessionCase::Case11);
}

TEST_CASE("suppressed completed visit costs one handover in paper mode, none in flowchart mode") {
  const SessionPath path = make_path(StartCell::Macro, 100.0, {10.0, 70.0}, {80.0});
  const SessionOutcome paper = tally(path, CountingMode::Paper);
  const SessionOutcome flow = tally(path, CountingMode::Flowchart);
  CHECK(paper.n_handover_to == 1);
  CHECK(flow.n_handover_to == 0);
  CHECK(paper.t_offload_to == 0.0);
  CHECK(flow.t_offload_to == 0.0);
}

TEST_CASE("session-ending visit and start femto stay") {
  // Starts in a femtocell (leaves at 20), re-enters at 50, session ends at
  // 90 with the threshold 30 expired after 80.
  const SessionOutcome o =
      tally(make_path(StartCell::Femto, 90.0, {20.0, 50.0}, {30.0}), CountingMode::Paper);
  CHECK(o.n_handover_baseline == 2);
  CHECK(o.n_handover_to == 2);  // start exit + expired final visit
  CHECK(o.t_offload_baseline == 60.0);
  CHECK(o.t_offload_to == 30.0);
  CHECK(o.case_label == SessionCase::Case22);

  const SessionOutcome pending =
      tally(make_path(StartCell::Femto, 90.0, {20.0, 50.0}, {45.0}), CountingMode::Paper);
  CHECK(pending.n_handover_to == 1);
  CHECK(pending.t_offload_to == 20.0);
  CHECK(tally(make_path(StartCell::Femto, 90.0, {20.0}, {}), CountingMode::Paper).case_label ==
        SessionCase::Case21);
  CHECK(tally(make_path(StartCell::Macro, 90.0, {20.0}, {1.0}), CountingMode::Paper).case_label ==
        SessionCase::Case12);
}

TEST_CASE("per-session invariants") {
  const ScenarioParams p = reference_scenario(60.0);
  for (CountingMode mode : {CountingMode::Paper, CountingMode::Flowchart}) {
    for (std::uint64_t i = 0; i < 20000; ++i) {
      RandomStream rs(99, i);
      const SessionOutcome o = simulate_session(p, rs, mode);
      REQUIRE(o.n_handover_to <= o.n_handover_baseline);
      REQUIRE(o.t_offload_to <= o.t_offload_baseline);
      REQUIRE(o.t_offload_baseline <= o.t_session);
      REQUIRE(o.t_offload_to >= 0.0);
      REQUIRE(o.n_crossings == o.n_handover_baseline);
    }
  }
}

TEST_CASE("configuration validation") {
  SimConfig cfg;
  cfg.replications = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.replications = 1000;
  cfg.batch_count = 7;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.batch_count = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.batch_count = 100;
  CHECK_NOTHROW(cfg.validate());
  CHECK(parse_counting_mode("flowchart") == CountingMode::Flowchart);
  CHECK_THROWS_AS(parse_counting_mode("other"), DomainError);
}

TEST_CASE("results do not depend on the worker count") {
  SimConfig cfg;
  cfg.replications = 40000;
  cfg.batch_count = 40;
  cfg.seed = 12345;
  cfg.threads = 1;
  const MonteCarloResult one = run_monte_carlo(reference_scenario(120.0), cfg);
  cfg.threads = 4;
  const MonteCarloResult four = run_monte_carlo(reference_scenario(120.0), cfg);
  CHECK(same_bits(one.e_nt.mean, four.e_nt.mean));
  CHECK(same_bits(one.e_tt.mean, four.e_tt.mean));
  CHECK(same_bits(one.theta.mean, four.theta.mean));
  CHECK(same_bits(one.lambda.ci_halfwidth, four.lambda.ci_halfwidth));
  CHECK(one.crossing_histogram == four.crossing_histogram);
  cfg.seed = 12346;
  CHECK_FALSE(same_bits(run_monte_carlo(reference_scenario(120.0), cfg).e_nt.mean, one.e_nt.mean));
}

TEST_CASE("confidence intervals shrink like one over root n") {
  SimConfig cfg;
  cfg.batch_count = 50;
  cfg.replications = 50000;
  const double wide = run_monte_carlo(reference_scenario(60.0), cfg).e_nt.ci_halfwidth;
  cfg.replications = 800000;
  const double narrow = run_monte_carlo(reference_scenario(60.0), cfg).e_nt.ci_halfwidth;
  CHECK(narrow > 0.0);
  CHECK(wide / narrow == doctest::Approx(4.0).epsilon(0.3));
}

TEST_CASE("Monte Carlo agrees with the analytics (first table column, 10^6 sessions)") {
  const ScenarioParams p = reference_scenario(60.0);
  const AnalyticReport a = analyze(p);
  SimConfig cfg;
  const MonteCarloResult m = run_monte_carlo(p, cfg);
  CHECK(within(a.e_nb, m.e_nb));
  CHECK(within(a.e_nt, m.e_nt));
  CHECK(within(a.e_tb, m.e_tb));
  CHECK(within(a.e_tt, m.e_tt));
  CHECK(within(a.theta, m.theta));
  CHECK(within(a.lambda, m.lambda));
  CHECK(within(a.prob_case1, m.case1_frequency));
  for (double rel : {rel_diff(a.e_nt, m.e_nt.mean), rel_diff(a.e_tt, m.e_tt.mean),
                     rel_diff(a.theta, m.theta.mean), rel_diff(a.lambda, m.lambda.mean)}) {
    CHECK(rel < 0.01);
  }

  // Crossing-count histograms against the pmf.
  for (int s = 0; s < 2; ++s) {
    const StartCell start = s == 0 ? StartCell::Macro : StartCell::Femto;
    std::uint64_t n = 0;
    for (auto c : m.crossing_histogram[s]) n += c;
    const double pv = toff::testing::chi_square_p_value(
        m.crossing_histogram[s], [&](unsigned k) { return crossing_count_pmf(p, start, k); }, n);
    CAPTURE(s);
    CHECK(pv > 0.01);
  }
}

TEST_CASE("visit-level statistics match the conditional quantities") {
  const ScenarioParams p = reference_scenario(60.0);
  const AnalyticReport a = analyze(p);
  SimConfig cfg;
  const VisitProbe v = visit_level_probe(p, cfg);
  CHECK(within(a.alpha, v.alpha));
  CHECK(within(a.beta, v.beta));
  CHECK(within(a.tau, v.tau));
  CHECK(within(a.sigma, v.sigma));
  CHECK(within(a.xi, v.xi));
  CHECK(within(a.phi, v.phi));
  CHECK(within(a.rho, v.rho));
  const double gap_se = std::hypot(v.tau.std_error, v.sigma.std_error);
  CHECK(std::abs(v.tau.mean - v.sigma.mean) < 3.0 * gap_se);
}

TEST_CASE("visit-level alpha for unit exponential rates") {
  const ScenarioParams p{1.0, ResidenceLaw::exponential(1.0), ResidenceLaw::exponential(1.0), 1.0};
  SimConfig cfg;
  cfg.replications = 1'000'000;
  const VisitProbe v = visit_level_probe(p, cfg);
  CHECK(within(1.0 / 3.0, v.alpha));
  CHECK(within(0.5, v.xi));
}

TEST_CASE("threshold-rate limits of the simulated reduction ratio") {
  const ScenarioParams p = reference_scenario(60.0).with_threshold_rate(1e-12);
  SimConfig cfg;
  cfg.replications = 200000;
  cfg.counting_mode = CountingMode::Paper;
  const MonteCarloResult paper = run_monte_carlo(p, cfg);
  CHECK(within(0.5, paper.theta));

  // Flowchart mode: every handover is suppressed except leaving a femtocell
  // the session started in, which no threshold governs.
  cfg.counting_mode = CountingMode::Flowchart;
  const MonteCarloResult flow = run_monte_carlo(p, cfg);
  const auto& femto_starts = flow.crossing_histogram[1];
  std::uint64_t start_exits = 0;
  for (std::size_t k = 1; k < femto_starts.size(); ++k) start_exits += femto_starts[k];
  const double total_crossings = flow.e_nb.mean * cfg.replications;
  CHECK(flow.theta.mean == doctest::Approx(1.0 - start_exits / total_crossings).epsilon(1e-12));
  const AnalyticReport a = analyze(p);
  const double expected_limit =
      1.0 - a.prob_case2 * (1.0 - crossing_count_pmf(p, StartCell::Femto, 0)) / a.e_nb;
  CHECK(within(expected_limit, flow.theta));
  CHECK(flow.theta.mean > 0.95);
}

}  // TEST_SUITE
