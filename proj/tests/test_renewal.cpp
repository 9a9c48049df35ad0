#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "support.hpp"
#include "toff/error.hpp"
#include "toff/renewal.hpp"

using namespace toff;
using toff::testing::rel_diff;
using toff::testing::reference_scenario;

namespace {

ScenarioParams exponential_scenario(double session_rate, double macro_rate, double femto_rate,
                                    double threshold_rate) {
  return {session_rate, ResidenceLaw::exponential(1.0 / macro_rate),
          ResidenceLaw::exponential(1.0 / femto_rate), threshold_rate};
}

std::vector<ScenarioParams> random_scenarios(int count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto log_uniform = [&](double lo, double hi) {
    return std::exp(std::log(lo) + u(gen) * (std::log(hi) - std::log(lo)));
  };
  std::vector<ScenarioParams> out;
  for (int i = 0; i < count; ++i) {
    const double session_mean = log_uniform(10.0, 5000.0);
    const double macro_mean = log_uniform(5.0, 2000.0);
    const double femto_mean = log_uniform(1.0, 2000.0);
    out.push_back({1.0 / session_mean,
                   ResidenceLaw::gamma(macro_mean, macro_mean * macro_mean / log_uniform(0.05, 50.0)),
                   ResidenceLaw::gamma(femto_mean, femto_mean * femto_mean / log_uniform(0.05, 50.0)),
                   1.0 / log_uniform(0.1, 2000.0)});
  }
  return out;
}

// Case expectations summed term by term over the crossing-count pmf, from
// what each crossing pattern contributes:
//   1-1, N = 2i:    i completed femto visits
//   1-2, N = 2i+1:  i completed visits and a session-ending visit
//   2-1, N = 2i+1:  a start stay, then i completed visits
//   2-2, N = 2i:    a start stay, i-1 completed visits, a session-ending visit
struct SeriesOracle {
  double nt = 0.0;
  double tb = 0.0;
  double tt = 0.0;
};

SeriesOracle series_oracle(const ScenarioParams& p) {
  const auto [alpha, beta] = handover_success_probs(p);
  const OffloadTimeMeans m = offload_time_means(p);
  const auto [p1, p2] = case_probabilities(p);
  SeriesOracle o;
  for (unsigned k = 1; k < 200000; ++k) {
    const double w1 = crossing_count_pmf(p, StartCell::Macro, k);
    const double w2 = crossing_count_pmf(p, StartCell::Femto, k);
    if (w1 < 1e-300 && w2 < 1e-300) break;
    const double i = k / 2;
    if (k % 2 == 0) {
      o.nt += p1 * w1 * i * (1.0 + alpha) + p2 * w2 * (1.0 + (i - 1.0) * (1.0 + alpha) + beta);
      o.tb += p1 * w1 * i * m.xi + p2 * w2 * (m.tau + (i - 1.0) * m.xi + m.sigma);
      o.tt += p1 * w1 * i * m.alpha_phi + p2 * w2 * (m.tau + (i - 1.0) * m.alpha_phi + m.beta_rho);
    } else {
      o.nt += p1 * w1 * (i * (1.0 + alpha) + beta) + p2 * w2 * (1.0 + i * (1.0 + alpha));
      o.tb += p1 * w1 * (i * m.xi + m.sigma) + p2 * w2 * (m.tau + i * m.xi);
      o.tt += p1 * w1 * (i * m.alpha_phi + m.beta_rho) + p2 * w2 * (m.tau + i * m.alpha_phi);
    }
  }
  return o;
}

}  // namespace

TEST_SUITE("renewal_analytics") {

TEST_CASE("case probabilities") {
  const auto sym = case_probabilities(exponential_scenario(1.0, 2.0, 2.0, 1.0));
  CHECK(sym.case1 == 0.5);
  CHECK(sym.case2 == 0.5);
  const auto probs = case_probabilities(exponential_scenario(1.0, 10.0, 40.0, 1.0));
  CHECK(probs.case1 == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(probs.case2 == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(probs.case1 + probs.case2 == 1.0);
}

TEST_CASE("baseline handover count") {
  CHECK(baseline_handover_count(reference_scenario(60.0)) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(baseline_handover_count(exponential_scenario(1.0, 1.0, 1.0, 1.0)) == doctest::Approx(1.0));
}

TEST_CASE("handover success probabilities") {
  const auto [alpha, beta] = handover_success_probs(exponential_scenario(1.0, 1.0, 1.0, 1.0));
  CHECK(alpha == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(beta >= 0.0);
  CHECK(beta <= 1.0);
  CHECK(handover_success_probs(reference_scenario(60.0).with_threshold_rate(1e300)).alpha ==
        doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("stable forms agree with the direct transform formulas") {
  for (const ScenarioParams& p : random_scenarios(50, 11)) {
    const double es = p.session_rate;
    const double eo = p.threshold_rate;
    const double f0 = p.femto.laplace(es);
    const double f1 = p.femto.laplace(es + eo);
    const double alpha = (f0 - f1) / f0;
    const double beta = (eo / (es + eo) + es / (es + eo) * f1 - f0) / (1.0 - f0);
    const auto probs = handover_success_probs(p);
    // The direct forms cancel; compare with a tolerance scaled to that loss.
    const double cancel = 1e-14 / std::max(1e-300, std::min({alpha, 1.0 - f0, beta}));
    CHECK(std::abs(probs.alpha - alpha) <= std::max(1e-12, cancel) * std::max(1.0, alpha));
    CHECK(std::abs(probs.beta - beta) <= std::max(1e-10, cancel));
  }
}

TEST_CASE("crossing-count pmf") {
  const ScenarioParams p = exponential_scenario(1.0, 1.0, 3.0, 1.0);
  CHECK(crossing_count_pmf(p, StartCell::Macro, 0) == doctest::Approx(0.5).epsilon(1e-15));

  for (const ScenarioParams& q : {reference_scenario(60.0), p}) {
    const auto [p1, p2] = case_probabilities(q);
    double combined_mean = 0.0;
    for (StartCell start : {StartCell::Macro, StartCell::Femto}) {
      double total = 0.0, mean = 0.0;
      for (unsigned k = 0; k < 100000; ++k) {
        const double w = crossing_count_pmf(q, start, k);
        total += w;
        mean += k * w;
      }
      CHECK(std::abs(total - 1.0) < 1e-12);
      CHECK(rel_diff(mean, crossing_count_mean(q, start)) < 1e-11);
      combined_mean += (start == StartCell::Macro ? p1 : p2) * mean;
    }
    CHECK(rel_diff(combined_mean, baseline_handover_count(q)) < 1e-11);
  }
}

TEST_CASE("reference analytic values are reproduced") {
  for (const auto& col : toff::testing::reference_columns()) {
    const AnalyticReport r = analyze(reference_scenario(col.threshold_mean));
    CAPTURE(col.threshold_mean);
    CHECK(rel_diff(r.e_nt, col.e_nt) < 1e-4);
    CHECK(rel_diff(r.e_tt, col.e_tt) < 1e-4);
    CHECK(rel_diff(r.theta, col.theta) < 1e-4);
    CHECK(rel_diff(r.lambda, col.lambda) < 1e-4);
    CHECK(r.warnings.empty());
    // Baseline offload time back-solved from the reference T_t and lambda.
    CHECK(rel_diff(r.e_tb, col.e_tt / col.lambda) < 1e-4);
  }
}

TEST_CASE("frozen intermediates of the first table column") {
  // Values from an independent evaluation of the transform formulas.
  const AnalyticReport r = analyze(reference_scenario(60.0));
  CHECK(r.alpha == doctest::Approx(0.112068).epsilon(1e-5));
  CHECK(r.beta == doctest::Approx(0.741016).epsilon(1e-5));
  CHECK(r.tau == doctest::Approx(228.81012).epsilon(1e-6));
  CHECK(r.xi == doctest::Approx(22.5).epsilon(1e-9));
  CHECK(r.phi == doctest::Approx(140.771).epsilon(1e-5));
  CHECK(r.rho == doctest::Approx(248.779).epsilon(1e-5));
  CHECK(r.e_nb == doctest::Approx(10.0));
  CHECK(r.e_tb == doctest::Approx(236.839053).epsilon(1e-8));
}

TEST_CASE("case sums equal a term-by-term series over the crossing count") {
  std::vector<ScenarioParams> cases = random_scenarios(20, 5);
  cases.push_back(reference_scenario(60.0));
  cases.push_back(reference_scenario(240.0));
  for (const ScenarioParams& p : cases) {
    const SeriesOracle o = series_oracle(p);
    CHECK(rel_diff(to_handover_count(p).total, o.nt) < 1e-9);
    CHECK(rel_diff(baseline_offload_time(p).total, o.tb) < 1e-9);
    CHECK(rel_diff(to_offload_time(p).total, o.tt) < 1e-9);
  }
}

TEST_CASE("closed forms agree with the case sums on 100 random scenarios") {
  int checked = 0;
  for (const ScenarioParams& p : random_scenarios(100, 2024)) {
    const AnalyticReport r = analyze(p);
    CHECK(r.warnings.empty());
    CHECK(rel_diff(r.theta, r.theta_closed_form) < 1e-9);
    CHECK(rel_diff(r.lambda, r.lambda_closed_form) < 1e-9);
    CHECK_NOTHROW(verify_closed_forms(r));
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("disagreeing closed forms raise a consistency error") {
  AnalyticReport r = analyze(reference_scenario(60.0));
  r.lambda_closed_form *= 1.0 + 1e-6;
  CHECK_THROWS_AS(verify_closed_forms(r), ConsistencyError);
}

TEST_CASE("report invariants") {
  std::vector<ScenarioParams> cases = random_scenarios(100, 77);
  for (const ScenarioParams& p : cases) {
    const AnalyticReport r = analyze(p);
    CHECK(r.alpha >= 0.0);
    CHECK(r.alpha <= 1.0);
    CHECK(r.beta >= 0.0);
    CHECK(r.beta <= 1.0);
    CHECK(r.sigma == r.tau);
    // Offloaded time per visit never exceeds the visit itself.
    const OffloadTimeMeans m = offload_time_means(p);
    CHECK(m.alpha_phi <= r.xi * (1.0 + 1e-12));
    CHECK(m.beta_rho <= r.sigma * (1.0 + 1e-12));
    // Conditioned on expiry, phi can exceed xi for decreasing-hazard laws;
    // with shape >= 1 the expired visits are not longer on average.
    if (p.femto.shape() >= 1.0) CHECK(r.phi <= r.xi * (1.0 + 1e-12));
    CHECK(r.e_nt <= r.e_nb);
    CHECK(r.e_tt <= r.e_tb);
    CHECK(r.theta > 0.0);
    CHECK(r.theta <= 1.0);
    CHECK(r.lambda > 0.0);
    CHECK(r.lambda <= 1.0);
    CHECK(r.prob_case1 + r.prob_case2 == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("exponential femto stays: residual and age equal the full visit") {
  for (double es : {0.01, 0.5, 3.0}) {
    const ScenarioParams p = exponential_scenario(es, 0.2, 0.7, 1.0);
    const OffloadTimeMeans m = offload_time_means(p);
    CHECK(m.tau == doctest::Approx(1.0 / (0.7 + es)).epsilon(1e-12));
    CHECK(m.xi == doctest::Approx(1.0 / (0.7 + es)).epsilon(1e-12));
    CHECK(m.sigma == m.tau);
  }
}

TEST_CASE("expiry-conditioned offload time exceeds the mean visit for heavy femto laws") {
  const AnalyticReport r = analyze(reference_scenario(60.0));
  CHECK(r.phi > r.xi);
}

TEST_CASE("limits in the threshold rate") {
  // The femto transform decays like rate^-shape, so the fast limit is probed
  // far out for the heavy reference law.
  for (const ScenarioParams& base : {reference_scenario(60.0), exponential_scenario(0.01, 0.1, 0.2, 1.0)}) {
    const AnalyticReport fast = analyze(base.with_threshold_rate(1e300));
    CHECK(fast.theta < 1e-6);
    CHECK(std::abs(fast.lambda - 1.0) < 1e-6);
    CHECK(rel_diff(fast.e_nt, fast.e_nb) < 1e-6);
    CHECK(rel_diff(fast.e_tt, fast.e_tb) < 1e-6);
    const AnalyticReport slow = analyze(base.with_threshold_rate(1e-12));
    CHECK(std::abs(slow.theta - 0.5) < 1e-6);
    CHECK(slow.lambda > 0.0);
  }
}

TEST_CASE("short sessions leave nothing to offload") {
  ScenarioParams p = reference_scenario(60.0);
  p.session_rate = 1e6;
  CHECK(baseline_offload_time(p).total < 1e-6);
}

TEST_CASE("offload time plus the zero-crossing part is the stationary femto share") {
  for (const ScenarioParams& p : random_scenarios(30, 9)) {
    const AnalyticReport r = analyze(p);
    const double femto_share = r.prob_case2 / p.session_rate;
    CHECK(rel_diff(r.e_tb + r.zero_crossing_offload, femto_share) < 1e-9);
  }
}

TEST_CASE("metrics are monotone in the threshold rate on tested grids") {
  std::vector<ScenarioParams> cases = random_scenarios(25, 31);
  cases.push_back(reference_scenario(60.0));
  for (const ScenarioParams& base : cases) {
    double prev_theta = 2.0, prev_lambda = -1.0;
    for (int i = 0; i <= 120; ++i) {
      const double eta = base.femto_rate() * std::pow(10.0, -6.0 + 0.1 * i);
      const ScenarioParams p = base.with_threshold_rate(eta);
      const double t = theta(p);
      const double l = lambda(p);
      CHECK(t <= prev_theta + 1e-12);
      CHECK(l >= prev_lambda - 1e-12);
      prev_theta = t;
      prev_lambda = l;
    }
  }
}

TEST_CASE("invalid parameters name the field") {
  ScenarioParams p = reference_scenario(60.0);
  p.session_rate = -1.0;
  try {
    analyze(p);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("session_rate") != std::string::npos);
  }
  p = reference_scenario(60.0);
  p.threshold_rate = 0.0;
  CHECK_THROWS_WITH_AS(analyze(p), doctest::Contains("threshold_rate"), DomainError);
}

}  // TEST_SUITE
