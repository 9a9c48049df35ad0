#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "toff/renewal.hpp"

namespace toff {

enum class TraceEvent { SessionStart, SessionEnd, FemtoEnter, FemtoExit };
std::string_view to_string(TraceEvent e);

/// One CSV row: ue_id,event,timestamp_seconds. A UE that is already attached
/// to a femtocell when its session starts logs femto_enter at the session
/// start timestamp, right after session_start.
struct TraceRow {
  std::string ue_id;
  TraceEvent event;
  double timestamp;
  std::size_t line;  // 1-based line in the source document
};

/// One observed session, with the femto stays clipped to it.
struct TraceSession {
  std::string ue_id;
  double start = 0.0;
  double end = 0.0;
  bool starts_in_femto = false;
  bool ends_in_femto = false;
  std::vector<double> enters;  // femto entries after the start, in order
  std::vector<double> exits;   // femto exits, in order
};

/// Parses and validates a trace. Rows of different UEs may interleave; each
/// UE's rows must be time-ordered, sessions must not nest, and femto events
/// must alternate inside a session. Throws ParseError anchored at the row.
std::vector<TraceSession> parse_trace(std::istream& in);

/// Writes `sessions` sampled sessions (UE ids ue0, ue1, ...).
void write_synthetic_trace(const ScenarioParams& p, std::uint64_t sessions, std::uint64_t seed,
                           std::ostream& out);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double variance = 0.0;  // of the underlying residence or session law
  std::uint64_t samples = 0;
};

struct TraceEstimate {
  MeanEstimate femto;
  MeanEstimate macro;
  MeanEstimate session;
  std::uint64_t sessions = 0;
  std::vector<std::string> notes;
};

/// Mean residence times from clipped observation windows.
///
/// Femto mean = total femto time / femto entries, macro mean = total macro
/// time / femto exits; both are renewal-reward ratios that stay unbiased
/// under clipping by exponential session windows, where the plain average
/// of complete stays favours short ones. Standard errors use the delta
/// method over sessions. Variances weight each complete stay of length L by
/// exp(L / mean session), the inverse of its chance of being seen whole.
TraceEstimate estimate_from_trace(const std::vector<TraceSession>& sessions);

}  // namespace toff
