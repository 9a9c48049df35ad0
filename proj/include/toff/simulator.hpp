#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "toff/random_stream.hpp"
#include "toff/renewal.hpp"

namespace toff {

/// How a completed femto visit whose threshold did not expire is charged.
///   Paper:     one handover (the convention behind the analytic case sums).
///   Flowchart: zero handovers (no handover is ever triggered).
enum class CountingMode { Paper, Flowchart };

std::string_view to_string(CountingMode mode);
CountingMode parse_counting_mode(std::string_view text);

enum class SessionCase { Case11, Case12, Case21, Case22, ZeroCrossing };
std::string_view to_string(SessionCase c);

/// One sampled session: the start cell, the session length and the crossing
/// instants, plus one offloading threshold per femto entry (in entry order).
struct SessionPath {
  StartCell start = StartCell::Macro;
  double session_length = 0.0;
  std::vector<double> crossings;
  std::vector<double> thresholds;
};

/// Draws a session of the alternating renewal process. The start cell is
/// chosen with the stationary probabilities, the first residence is drawn
/// from the equilibrium law of the start cell, later residences are full
/// draws. `path` is overwritten; its buffers are reused.
void sample_path(const ScenarioParams& p, RandomStream& rs, SessionPath& path);

struct SessionOutcome {
  StartCell start_cell = StartCell::Macro;
  SessionCase case_label = SessionCase::ZeroCrossing;
  unsigned n_crossings = 0;
  unsigned n_handover_baseline = 0;
  unsigned n_handover_to = 0;
  double t_offload_baseline = 0.0;
  double t_offload_to = 0.0;
  double t_session = 0.0;
};

/// Applies the baseline and threshold-offloading tallies to a sampled path.
SessionOutcome tally(const SessionPath& path, CountingMode mode);

SessionOutcome simulate_session(const ScenarioParams& p, RandomStream& rs, CountingMode mode);

struct SimConfig {
  std::uint64_t replications = 1'000'000;
  std::uint64_t seed = 1;
  CountingMode counting_mode = CountingMode::Paper;
  std::uint64_t batch_count = 100;
  unsigned threads = 0;  // 0: hardware concurrency

  /// Throws DomainError.
  void validate() const;
};

struct SimEstimate {
  double mean = 0.0;
  double ci_halfwidth = 0.0;  // 95 %
  double std_error = 0.0;
  std::uint64_t n = 0;
};

struct MonteCarloResult {
  SimEstimate e_nb;
  SimEstimate e_nt;
  SimEstimate e_tb;
  SimEstimate e_tt;
  SimEstimate theta;
  SimEstimate lambda;
  /// Fraction of sessions starting in the macrocell.
  SimEstimate case1_frequency;
  std::array<std::uint64_t, 5> case_counts{};  // indexed by SessionCase
  /// Crossing-count histograms, [0] for macro starts and [1] for femto starts.
  std::array<std::vector<std::uint64_t>, 2> crossing_histogram;
};

/// Ratios of means over cfg.replications sessions, with batch-means
/// confidence intervals. Replication i uses RandomStream(cfg.seed, i), and
/// batches are reduced in index order, so results are bitwise identical for
/// any thread count.
///
/// In paper mode, sessions that start in a femtocell and never leave it
/// contribute no offload time, matching the analytic case sums, which begin
/// Case 2 at the first crossing. Flowchart mode charges their full length.
MonteCarloResult run_monte_carlo(const ScenarioParams& p, const SimConfig& cfg);

/// Empirical conditional visit statistics.
struct VisitProbe {
  SimEstimate alpha;  // completed entered visits: threshold expired
  SimEstimate beta;   // session-ending entered visits: threshold expired
  SimEstimate tau;    // completed session-start femto residual
  SimEstimate sigma;  // age of session-ending entered visits
  SimEstimate xi;     // length of completed entered visits
  SimEstimate phi;    // offloaded time of completed visits with expired threshold
  SimEstimate rho;    // offloaded time of session-ending visits with expired threshold
};

VisitProbe visit_level_probe(const ScenarioParams& p, const SimConfig& cfg);

}  // namespace toff
