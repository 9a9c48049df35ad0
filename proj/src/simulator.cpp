#include "toff/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "toff/error.hpp"

namespace toff {
namespace {

struct Moments {
  std::uint64_t n = 0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    ++n;
    sum += x;
    sum_sq += x * x;
  }
  void merge(const Moments& o) {
    n += o.n;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }
  double mean() const { return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / n; }
  double variance() const {
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = sum / n;
    return std::max(0.0, (sum_sq - n * m * m) / (n - 1));
  }
};

// Per-observation estimate: standard error sd/sqrt(n), normal 95 % interval.
SimEstimate iid_estimate(const Moments& m) {
  SimEstimate e;
  e.n = m.n;
  e.mean = m.mean();
  e.std_error = m.n < 2 ? std::numeric_limits<double>::infinity() : std::sqrt(m.variance() / m.n);
  e.ci_halfwidth = 1.959963984540054 * e.std_error;
  return e;
}

// Batch-means estimate around a given point value.
SimEstimate batch_estimate(double point, const std::vector<double>& batch_values,
                           std::uint64_t n) {
  SimEstimate e;
  e.mean = point;
  e.n = n;
  Moments m;
  for (double v : batch_values) {
    if (std::isfinite(v)) m.add(v);
  }
  if (m.n < 2) {
    e.std_error = std::numeric_limits<double>::infinity();
    e.ci_halfwidth = std::numeric_limits<double>::infinity();
    return e;
  }
  e.std_error = std::sqrt(m.variance() / m.n);
  const boost::math::students_t dist(static_cast<double>(m.n - 1));
  e.ci_halfwidth = boost::math::quantile(dist, 0.975) * e.std_error;
  return e;
}

// Runs fn(first, last, batch_state) for every batch; batches are claimed
// dynamically by the workers but results land at fixed indices.
template <typename Batch, typename Fn>
std::vector<Batch> run_batches(const SimConfig& cfg, Fn fn) {
  std::vector<Batch> batches(cfg.batch_count);
  const std::uint64_t per_batch = cfg.replications / cfg.batch_count;
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= cfg.batch_count) return;
      try {
        fn(b * per_batch, (b + 1) * per_batch, batches[b]);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(cfg.batch_count);
        return;
      }
    }
  };

  unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                      : cfg.threads;
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, cfg.batch_count));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
  return batches;
}

struct SessionBatch {
  std::uint64_t n = 0;
  double nb = 0.0;
  double nt = 0.0;
  double tb = 0.0;
  double tt = 0.0;
  std::uint64_t macro_starts = 0;
  std::array<std::uint64_t, 5> case_counts{};
  std::array<std::vector<std::uint64_t>, 2> histogram;
};

void bump(std::vector<std::uint64_t>& hist, unsigned k) {
  if (hist.size() <= k) hist.resize(k + 1, 0);
  ++hist[k];
}

}  // namespace

std::string_view to_string(CountingMode mode) {
  return mode == CountingMode::Paper ? "paper" : "flowchart";
}

CountingMode parse_counting_mode(std::string_view text) {
  if (text == "paper") return CountingMode::Paper;
  if (text == "flowchart") return CountingMode::Flowchart;
  throw DomainError("unknown counting mode '" + std::string(text) +
                    "' (expected paper or flowchart)");
}

std::string_view to_string(SessionCase c) {
  switch (c) {
    case SessionCase::Case11: return "1-1";
    case SessionCase::Case12: return "1-2";
    case SessionCase::Case21: return "2-1";
    case SessionCase::Case22: return "2-2";
    case SessionCase::ZeroCrossing: break;
  }
  return "degenerate-0-crossing";
}

void sample_path(const ScenarioParams& p, RandomStream& rs, SessionPath& path) {
  const double prob_femto_start = p.macro_rate() / (p.macro_rate() + p.femto_rate());
  path.crossings.clear();
  path.thresholds.clear();
  path.start = rs.uniform() < prob_femto_start ? StartCell::Femto : StartCell::Macro;
  path.session_length = rs.exponential(p.session_rate);

  bool in_femto = path.start == StartCell::Femto;
  double now = 0.0;
  double stay = (in_femto ? p.femto : p.macro).residual_sample(rs);
  while (now + stay < path.session_length) {
    now += stay;
    path.crossings.push_back(now);
    in_femto = !in_femto;
    if (in_femto) path.thresholds.push_back(rs.exponential(p.threshold_rate));
    stay = (in_femto ? p.femto : p.macro).sample(rs);
  }
}

SessionOutcome tally(const SessionPath& path, CountingMode mode) {
  SessionOutcome out;
  out.start_cell = path.start;
  out.t_session = path.session_length;
  const std::size_t n = path.crossings.size();
  out.n_crossings = static_cast<unsigned>(n);
  out.n_handover_baseline = out.n_crossings;

  bool in_femto = path.start == StartCell::Femto;
  std::size_t entry = 0;
  for (std::size_t j = 0; j <= n; ++j, in_femto = !in_femto) {
    if (!in_femto) continue;
    const double begin = j == 0 ? 0.0 : path.crossings[j - 1];
    const double end = j < n ? path.crossings[j] : path.session_length;
    const bool completed = j < n;
    const double stay = end - begin;
    out.t_offload_baseline += stay;

    if (j == 0) {
      // Already attached when the session starts: offloaded in full, and the
      // exit is a real handover.
      out.t_offload_to += stay;
      if (completed) out.n_handover_to += 1;
      continue;
    }
    const double threshold = path.thresholds.at(entry++);
    const bool expired = threshold < stay;
    if (expired) out.t_offload_to += stay - threshold;
    if (completed) {
      if (expired) {
        out.n_handover_to += 2;
      } else if (mode == CountingMode::Paper) {
        out.n_handover_to += 1;
      }
    } else if (expired) {
      out.n_handover_to += 1;
    }
  }

  const bool starts_macro = path.start == StartCell::Macro;
  const bool ends_macro = (n % 2 == 0) == starts_macro;
  if (n == 0) {
    out.case_label = SessionCase::ZeroCrossing;
  } else if (starts_macro) {
    out.case_label = ends_macro ? SessionCase::Case11 : SessionCase::Case12;
  } else {
    out.case_label = ends_macro ? SessionCase::Case21 : SessionCase::Case22;
  }
  return out;
}

SessionOutcome simulate_session(const ScenarioParams& p, RandomStream& rs, CountingMode mode) {
  SessionPath path;
  sample_path(p, rs, path);
  return tally(path, mode);
}

void SimConfig::validate() const {
  if (replications < 1) throw DomainError("replications must be >= 1");
  if (batch_count < 1) throw DomainError("batch_count must be >= 1");
  if (replications % batch_count != 0) {
    throw DomainError("batch_count (" + std::to_string(batch_count) +
                      ") must divide replications (" + std::to_string(replications) + ")");
  }
}

MonteCarloResult run_monte_carlo(const ScenarioParams& p, const SimConfig& cfg) {
  p.validate();
  cfg.validate();
  const CountingMode mode = cfg.counting_mode;

  auto batches = run_batches<SessionBatch>(
      cfg, [&](std::uint64_t first, std::uint64_t last, SessionBatch& b) {
        SessionPath path;
        for (std::uint64_t i = first; i < last; ++i) {
          RandomStream rs(cfg.seed, i);
          sample_path(p, rs, path);
          const SessionOutcome o = tally(path, mode);
          ++b.n;
          b.nb += o.n_handover_baseline;
          b.nt += o.n_handover_to;
          const bool uncounted_stay =
              mode == CountingMode::Paper && o.case_label == SessionCase::ZeroCrossing;
          if (!uncounted_stay) {
            b.tb += o.t_offload_baseline;
            b.tt += o.t_offload_to;
          }
          if (o.start_cell == StartCell::Macro) ++b.macro_starts;
          ++b.case_counts[static_cast<std::size_t>(o.case_label)];
          bump(b.histogram[o.start_cell == StartCell::Macro ? 0 : 1], o.n_crossings);
        }
      });

  SessionBatch total;
  std::vector<double> nb_b, nt_b, tb_b, tt_b, theta_b, lambda_b;
  for (const SessionBatch& b : batches) {
    total.n += b.n;
    total.nb += b.nb;
    total.nt += b.nt;
    total.tb += b.tb;
    total.tt += b.tt;
    total.macro_starts += b.macro_starts;
    for (std::size_t c = 0; c < b.case_counts.size(); ++c) total.case_counts[c] += b.case_counts[c];
    for (std::size_t s = 0; s < 2; ++s) {
      auto& dst = total.histogram[s];
      if (dst.size() < b.histogram[s].size()) dst.resize(b.histogram[s].size(), 0);
      for (std::size_t k = 0; k < b.histogram[s].size(); ++k) dst[k] += b.histogram[s][k];
    }
    const double n = static_cast<double>(b.n);
    nb_b.push_back(b.nb / n);
    nt_b.push_back(b.nt / n);
    tb_b.push_back(b.tb / n);
    tt_b.push_back(b.tt / n);
    theta_b.push_back(b.nb > 0.0 ? 1.0 - b.nt / b.nb : std::numeric_limits<double>::quiet_NaN());
    lambda_b.push_back(b.tb > 0.0 ? b.tt / b.tb : std::numeric_limits<double>::quiet_NaN());
  }

  const double n = static_cast<double>(total.n);
  MonteCarloResult r;
  r.e_nb = batch_estimate(total.nb / n, nb_b, total.n);
  r.e_nt = batch_estimate(total.nt / n, nt_b, total.n);
  r.e_tb = batch_estimate(total.tb / n, tb_b, total.n);
  r.e_tt = batch_estimate(total.tt / n, tt_b, total.n);
  r.theta = batch_estimate(
      total.nb > 0.0 ? 1.0 - total.nt / total.nb : std::numeric_limits<double>::quiet_NaN(),
      theta_b, total.n);
  r.lambda = batch_estimate(
      total.tb > 0.0 ? total.tt / total.tb : std::numeric_limits<double>::quiet_NaN(), lambda_b,
      total.n);

  const double freq = total.macro_starts / n;
  r.case1_frequency.mean = freq;
  r.case1_frequency.n = total.n;
  r.case1_frequency.std_error = std::sqrt(freq * (1.0 - freq) / n);
  r.case1_frequency.ci_halfwidth = 1.959963984540054 * r.case1_frequency.std_error;
  r.case_counts = total.case_counts;
  r.crossing_histogram = std::move(total.histogram);
  return r;
}

namespace {

struct ProbeBatch {
  Moments alpha, beta, tau, sigma, xi, phi, rho;

  void merge(const ProbeBatch& o) {
    alpha.merge(o.alpha);
    beta.merge(o.beta);
    tau.merge(o.tau);
    sigma.merge(o.sigma);
    xi.merge(o.xi);
    phi.merge(o.phi);
    rho.merge(o.rho);
  }
};

}  // namespace

VisitProbe visit_level_probe(const ScenarioParams& p, const SimConfig& cfg) {
  p.validate();
  cfg.validate();
  auto batches = run_batches<ProbeBatch>(
      cfg, [&](std::uint64_t first, std::uint64_t last, ProbeBatch& b) {
        SessionPath path;
        for (std::uint64_t i = first; i < last; ++i) {
          RandomStream rs(cfg.seed, i);
          sample_path(p, rs, path);
          const std::size_t n = path.crossings.size();
          bool in_femto = path.start == StartCell::Femto;
          std::size_t entry = 0;
          for (std::size_t j = 0; j <= n; ++j, in_femto = !in_femto) {
            if (!in_femto) continue;
            const double begin = j == 0 ? 0.0 : path.crossings[j - 1];
            const double end = j < n ? path.crossings[j] : path.session_length;
            const double stay = end - begin;
            const bool completed = j < n;
            if (j == 0) {
              if (completed) b.tau.add(stay);
              continue;
            }
            const double threshold = path.thresholds[entry++];
            const bool expired = threshold < stay;
            if (completed) {
              b.alpha.add(expired ? 1.0 : 0.0);
              b.xi.add(stay);
              if (expired) b.phi.add(stay - threshold);
            } else {
              b.beta.add(expired ? 1.0 : 0.0);
              b.sigma.add(stay);
              if (expired) b.rho.add(stay - threshold);
            }
          }
        }
      });

  ProbeBatch total;
  for (const ProbeBatch& b : batches) total.merge(b);
  VisitProbe probe;
  probe.alpha = iid_estimate(total.alpha);
  probe.beta = iid_estimate(total.beta);
  probe.tau = iid_estimate(total.tau);
  probe.sigma = iid_estimate(total.sigma);
  probe.xi = iid_estimate(total.xi);
  probe.phi = iid_estimate(total.phi);
  probe.rho = iid_estimate(total.rho);
  return probe;
}

}  // namespace toff
