#include "toff/trace.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "toff/error.hpp"
#include "toff/simulator.hpp"

namespace toff {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

TraceEvent parse_event(const std::string& s, std::size_t line) {
  if (s == "session_start") return TraceEvent::SessionStart;
  if (s == "session_end") return TraceEvent::SessionEnd;
  if (s == "femto_enter") return TraceEvent::FemtoEnter;
  if (s == "femto_exit") return TraceEvent::FemtoExit;
  throw ParseError(line, "unknown event '" + s + "'");
}

double parse_time(const std::string& s, std::size_t line) {
  char* end = nullptr;
  errno = 0;
  const double t = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(t)) {
    throw ParseError(line, "bad timestamp '" + s + "'");
  }
  return t;
}

struct UeState {
  double last = -std::numeric_limits<double>::infinity();
  bool in_session = false;
  bool in_femto = false;
  TraceSession current;
};

// Ratio of sums with a delta-method standard error over sessions.
struct RatioAccumulator {
  std::vector<double> num;
  std::vector<double> den;

  void add(double a, double b) {
    num.push_back(a);
    den.push_back(b);
  }

  void finish(MeanEstimate& out) const {
    double sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < num.size(); ++i) {
      sa += num[i];
      sb += den[i];
    }
    const double n = static_cast<double>(num.size());
    out.mean = sb > 0.0 ? sa / sb : std::numeric_limits<double>::quiet_NaN();
    if (!(sb > 0.0) || num.size() < 2) {
      out.std_error = std::numeric_limits<double>::infinity();
      return;
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < num.size(); ++i) {
      const double r = num[i] - out.mean * den[i];
      ss += r * r;
    }
    const double mean_den = sb / n;
    out.std_error = std::sqrt(ss / (n - 1.0) / n) / mean_den;
  }
};

}  // namespace

std::string_view to_string(TraceEvent e) {
  switch (e) {
    case TraceEvent::SessionStart: return "session_start";
    case TraceEvent::SessionEnd: return "session_end";
    case TraceEvent::FemtoEnter: return "femto_enter";
    case TraceEvent::FemtoExit: break;
  }
  return "femto_exit";
}

std::vector<TraceSession> parse_trace(std::istream& in) {
  std::map<std::string, UeState> ues;
  std::vector<TraceSession> sessions;
  std::string raw;
  std::size_t line = 0;
  bool header_allowed = true;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(text);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(trim(f));
    if (fields.size() != 3) throw ParseError(line, "expected 3 fields: ue_id,event,timestamp_seconds");
    if (header_allowed && fields[0] == "ue_id") {
      header_allowed = false;
      continue;
    }
    header_allowed = false;

    TraceRow row{fields[0], parse_event(fields[1], line), parse_time(fields[2], line), line};
    if (row.ue_id.empty()) throw ParseError(line, "empty ue_id");
    UeState& ue = ues[row.ue_id];
    if (row.timestamp < ue.last) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "timestamp " << row.timestamp << " of " << row.ue_id
          << " is earlier than its previous event at " << ue.last;
      throw ParseError(line, msg.str());
    }

    switch (row.event) {
      case TraceEvent::SessionStart:
        if (ue.in_session) throw ParseError(line, row.ue_id + ": session_start inside an open session");
        ue.in_session = true;
        ue.in_femto = false;
        ue.current = TraceSession{};
        ue.current.ue_id = row.ue_id;
        ue.current.start = row.timestamp;
        break;
      case TraceEvent::FemtoEnter:
        if (!ue.in_session) throw ParseError(line, row.ue_id + ": femto_enter outside a session");
        if (ue.in_femto) throw ParseError(line, row.ue_id + ": femto_enter without a matching femto_exit");
        ue.in_femto = true;
        if (row.timestamp == ue.current.start && ue.current.enters.empty() &&
            ue.current.exits.empty()) {
          ue.current.starts_in_femto = true;
        } else {
          ue.current.enters.push_back(row.timestamp);
        }
        break;
      case TraceEvent::FemtoExit:
        if (!ue.in_session) throw ParseError(line, row.ue_id + ": femto_exit outside a session");
        if (!ue.in_femto) throw ParseError(line, row.ue_id + ": femto_exit without a matching femto_enter");
        ue.in_femto = false;
        ue.current.exits.push_back(row.timestamp);
        break;
      case TraceEvent::SessionEnd:
        if (!ue.in_session) throw ParseError(line, row.ue_id + ": session_end without session_start");
        ue.current.end = row.timestamp;
        ue.current.ends_in_femto = ue.in_femto;
        ue.in_session = false;
        ue.in_femto = false;
        sessions.push_back(std::move(ue.current));
        ue.current = TraceSession{};
        break;
    }
    ue.last = row.timestamp;
  }
  for (const auto& [id, ue] : ues) {
    if (ue.in_session) throw ParseError(line, id + ": session is never closed");
  }
  if (sessions.empty()) throw ParseError(0, "trace contains no complete sessions");
  return sessions;
}

void write_synthetic_trace(const ScenarioParams& p, std::uint64_t sessions, std::uint64_t seed,
                           std::ostream& out) {
  p.validate();
  out.precision(17);
  out << "ue_id,event,timestamp_seconds\n";
  SessionPath path;
  for (std::uint64_t i = 0; i < sessions; ++i) {
    RandomStream rs(seed, i);
    sample_path(p, rs, path);
    const std::string id = "ue" + std::to_string(i);
    out << id << ",session_start,0\n";
    bool in_femto = path.start == StartCell::Femto;
    if (in_femto) out << id << ",femto_enter,0\n";
    for (double t : path.crossings) {
      in_femto = !in_femto;
      out << id << (in_femto ? ",femto_enter," : ",femto_exit,") << t << '\n';
    }
    out << id << ",session_end," << path.session_length << '\n';
  }
}

TraceEstimate estimate_from_trace(const std::vector<TraceSession>& sessions) {
  TraceEstimate est;
  est.sessions = sessions.size();
  if (sessions.empty()) throw DomainError("no sessions to estimate from");

  double sum_len = 0.0, sum_len_sq = 0.0;
  for (const TraceSession& s : sessions) {
    const double len = s.end - s.start;
    sum_len += len;
    sum_len_sq += len * len;
  }
  const double n = static_cast<double>(sessions.size());
  est.session.samples = sessions.size();
  est.session.mean = sum_len / n;
  est.session.variance =
      sessions.size() > 1 ? std::max(0.0, (sum_len_sq - n * est.session.mean * est.session.mean) / (n - 1))
                          : std::numeric_limits<double>::quiet_NaN();
  est.session.std_error = sessions.size() > 1 ? std::sqrt(est.session.variance / n)
                                              : std::numeric_limits<double>::infinity();
  const double session_rate = 1.0 / est.session.mean;

  RatioAccumulator femto, macro;
  double femto_weighted_sq = 0.0, macro_weighted_sq = 0.0;
  for (const TraceSession& s : sessions) {
    // Walk the alternating stays of this session.
    double femto_time = 0.0, macro_time = 0.0;
    bool in_femto = s.starts_in_femto;
    double since = s.start;
    bool entered = false;  // current stay began inside the window
    std::size_t ie = 0, ix = 0;
    for (;;) {
      const bool more = in_femto ? ix < s.exits.size() : ie < s.enters.size();
      const double until = more ? (in_femto ? s.exits[ix] : s.enters[ie]) : s.end;
      const double stay = until - since;
      (in_femto ? femto_time : macro_time) += stay;
      if (more && entered) {
        const double w = stay * stay * std::exp(session_rate * stay);
        (in_femto ? femto_weighted_sq : macro_weighted_sq) += w;
      }
      if (!more) break;
      (in_femto ? ix : ie) += 1;
      in_femto = !in_femto;
      since = until;
      entered = true;
    }
    femto.add(femto_time, static_cast<double>(s.enters.size()));
    macro.add(macro_time, static_cast<double>(s.exits.size()));
  }

  femto.finish(est.femto);
  macro.finish(est.macro);
  std::uint64_t entries = 0, exits = 0;
  for (const TraceSession& s : sessions) {
    entries += s.enters.size();
    exits += s.exits.size();
  }
  est.femto.samples = entries;
  est.macro.samples = exits;
  est.femto.variance = entries > 0 ? femto_weighted_sq / entries - est.femto.mean * est.femto.mean
                                   : std::numeric_limits<double>::quiet_NaN();
  est.macro.variance = exits > 0 ? macro_weighted_sq / exits - est.macro.mean * est.macro.mean
                                 : std::numeric_limits<double>::quiet_NaN();
  if (entries == 0) est.notes.emplace_back("no femto entries observed; femto mean is undefined");
  if (exits == 0) est.notes.emplace_back("no femto exits observed; macro mean is undefined");
  for (double* v : {&est.femto.variance, &est.macro.variance}) {
    if (*v <= 0.0) {
      est.notes.emplace_back("variance estimate is not positive; too few complete stays");
      *v = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return est;
}

}  // namespace toff
