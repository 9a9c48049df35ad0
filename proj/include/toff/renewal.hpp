#pragma once

#include <string>
#include <vector>

#include "toff/residence.hpp"

namespace toff {

/// Full parameter vector of the offloading model. Rates are in 1/s.
struct ScenarioParams {
  double session_rate;    // 1 / mean session length
  ResidenceLaw macro;     // macrocell residence time
  ResidenceLaw femto;     // femtocell residence time
  double threshold_rate;  // 1 / mean offloading threshold

  double macro_rate() const { return 1.0 / macro.mean(); }
  double femto_rate() const { return 1.0 / femto.mean(); }

  /// Throws DomainError naming the offending field.
  void validate() const;
  ScenarioParams with_threshold_rate(double rate) const;
};

enum class StartCell { Macro = 1, Femto = 2 };

/// The four session shapes, indexed by (start cell, end cell).
struct CaseValues {
  double case_1_1 = 0.0;  // starts and ends in the macrocell
  double case_1_2 = 0.0;  // starts in the macrocell, ends in a femtocell
  double case_2_1 = 0.0;  // starts in a femtocell, ends in the macrocell
  double case_2_2 = 0.0;  // starts and ends in a femtocell

  /// Unconditional expectation given the start-cell probabilities.
  double combine(double prob_case1, double prob_case2) const {
    return prob_case1 * (case_1_1 + case_1_2) + prob_case2 * (case_2_1 + case_2_2);
  }
};

/// Every intermediate and headline quantity of the renewal model.
///
/// Per-case entries are E[X ; sub-case | start cell], i.e. they sum (weighted
/// by the start-cell probabilities) to the unconditional expectation.
struct AnalyticReport {
  double prob_case1 = 0.0;
  double prob_case2 = 0.0;

  double alpha = 0.0;  // threshold expires within a completed femto visit
  double beta = 0.0;   // threshold expires within the session-ending visit
  double tau = 0.0;    // s, completed residual of the session-start femto stay
  double sigma = 0.0;  // s, age of the session-ending femto visit
  double xi = 0.0;     // s, completed femto visit length
  double phi = 0.0;    // s, offloaded part of a completed visit whose threshold expired
  double rho = 0.0;    // s, offloaded part of a session-ending visit whose threshold expired

  double crossing_ratio = 0.0;  // f*_m(eta_s) f*_f(eta_s)
  double x1 = 0.0;
  double x2 = 0.0;
  double x3 = 0.0;
  double y1 = 0.0;  // s
  double y2 = 0.0;  // s

  double e_nb = 0.0;
  double e_nt = 0.0;
  double e_tb = 0.0;  // s
  double e_tt = 0.0;  // s
  double theta = 0.0;
  double lambda = 0.0;

  double theta_closed_form = 0.0;
  double lambda_closed_form = 0.0;

  /// Expected femto time of sessions that start in a femtocell and end
  /// before leaving it. The case sums do not include these sessions.
  double zero_crossing_offload = 0.0;

  CaseValues handovers_to;
  CaseValues offload_baseline;
  CaseValues offload_to;

  /// Closed-form disagreements found while building the report.
  std::vector<std::string> warnings;
};

struct CaseProbabilities {
  double case1;
  double case2;
};
CaseProbabilities case_probabilities(const ScenarioParams& p);

double baseline_handover_count(const ScenarioParams& p);

struct HandoverSuccess {
  double alpha;
  double beta;
};
/// Throws DomainError if the femto law makes beta undefined.
HandoverSuccess handover_success_probs(const ScenarioParams& p);

/// Probability of exactly `crossings` cell crossings during a session that
/// starts in `start`.
double crossing_count_pmf(const ScenarioParams& p, StartCell start, unsigned crossings);
/// Mean of crossing_count_pmf for the given start cell (closed form).
double crossing_count_mean(const ScenarioParams& p, StartCell start);

struct OffloadTimeMeans {
  double tau;
  double sigma;
  double xi;
  double phi;
  double rho;
  double alpha_phi;  // products kept separately: stable as the threshold rate -> 0
  double beta_rho;
};
OffloadTimeMeans offload_time_means(const ScenarioParams& p);

struct Expectation {
  double total;
  CaseValues per_case;
};
Expectation to_handover_count(const ScenarioParams& p);
Expectation baseline_offload_time(const ScenarioParams& p);
Expectation to_offload_time(const ScenarioParams& p);

/// Signalling overhead reduction ratio, from the case sums.
double theta(const ScenarioParams& p);
/// Offloading capability ratio, from the case sums.
double lambda(const ScenarioParams& p);

double theta_closed_form(const ScenarioParams& p);
double lambda_closed_form(const ScenarioParams& p);

/// Default relative tolerance between case sums and closed forms.
inline constexpr double kClosedFormTolerance = 1e-9;

/// Builds the full report; closed-form disagreements are recorded in
/// `warnings` and the case-sum values are kept.
AnalyticReport analyze(const ScenarioParams& p);

/// Throws ConsistencyError if either closed form disagrees with its case sum
/// beyond `rel_tol`.
void verify_closed_forms(const AnalyticReport& report, double rel_tol = kClosedFormTolerance);

}  // namespace toff
