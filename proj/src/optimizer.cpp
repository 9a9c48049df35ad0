#include "toff/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "toff/error.hpp"

namespace toff {
namespace {

std::vector<double> log_grid(double lo, double hi, unsigned n) {
  std::vector<double> g(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (unsigned i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

// Interior candidates must clear the best bound by this relative margin.
constexpr double kTieMargin = 1e-12;

ObjectivePoint checked(const ObjectiveFn& f, double eta_o) {
  ObjectivePoint pt = f(eta_o);
  if (!std::isfinite(pt.objective)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "objective is not finite at eta_o = " << eta_o << " 1/s (theta = " << pt.theta
        << ", lambda = " << pt.lambda << ")";
    throw DomainError(msg.str());
  }
  return pt;
}

// Golden-section search for a maximum on [lo, hi], in log rate.
ObjectivePoint golden_max(const ObjectiveFn& f, double lo, double hi, double tol,
                          unsigned& evaluations) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(lo);
  double b = std::log(hi);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  ObjectivePoint fc = checked(f, std::exp(c));
  ObjectivePoint fd = checked(f, std::exp(d));
  evaluations += 2;
  while (b - a > tol) {
    if (fc.objective >= fd.objective) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = checked(f, std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = checked(f, std::exp(d));
    }
    ++evaluations;
  }
  return fc.objective >= fd.objective ? fc : fd;
}

}  // namespace

OptimizerConfig OptimizerConfig::defaults_for(const ScenarioParams& p) {
  OptimizerConfig cfg;
  cfg.delta = 1000.0 * p.femto_rate();
  cfg.epsilon_rate = cfg.delta * 1e-9;
  return cfg;
}

double OptimizerConfig::delta_from_min_threshold_mean(double seconds) {
  if (!(seconds > 0.0) || !std::isfinite(seconds)) {
    throw DomainError("min_threshold_mean_seconds must be finite and > 0");
  }
  return 1.0 / seconds;
}

void OptimizerConfig::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("delta must be finite and > 0");
  if (!(epsilon_rate > 0.0) || !(epsilon_rate < delta)) {
    throw DomainError("epsilon_rate must satisfy 0 < epsilon_rate < delta");
  }
  if (grid_points < 16) throw DomainError("grid_points must be >= 16");
  if (!(tolerance > 0.0)) throw DomainError("tolerance must be > 0");
}

std::string_view to_string(BoundaryHit b) {
  switch (b) {
    case BoundaryHit::Lower: return "lower";
    case BoundaryHit::Upper: return "upper";
    case BoundaryHit::None: break;
  }
  return "none";
}

ObjectivePoint evaluate_objective(const ScenarioParams& p, double eta_o) {
  const ScenarioParams q = p.with_threshold_rate(eta_o);
  ObjectivePoint pt{eta_o, theta(q), lambda(q), 0.0};
  pt.objective = pt.theta + pt.lambda;
  return pt;
}

double objective(const ScenarioParams& p, double eta_o) {
  return evaluate_objective(p, eta_o).objective;
}

Optimum find_optimal(const ScenarioParams& p, const OptimizerConfig& cfg) {
  p.validate();
  return maximize_objective([&p](double eta) { return evaluate_objective(p, eta); }, cfg);
}

Optimum maximize_objective(const ObjectiveFn& f, const OptimizerConfig& cfg) {
  cfg.validate();
  const std::vector<double> grid = log_grid(cfg.epsilon_rate, cfg.delta, cfg.grid_points);
  std::vector<ObjectivePoint> values;
  values.reserve(grid.size());
  for (double eta : grid) values.push_back(checked(f, eta));
  unsigned evaluations = static_cast<unsigned>(grid.size());

  const ObjectivePoint& lower = values.front();
  const ObjectivePoint& upper = values.back();
  ObjectivePoint best = lower;
  BoundaryHit hit = BoundaryHit::Lower;
  if (upper.objective > best.objective) {
    best = upper;
    hit = BoundaryHit::Upper;
  }

  // Every grid local maximum brackets a stationary point (or sits next to a
  // boundary); refine each and keep it only if it beats both boundaries.
  const double bound_value = best.objective;
  const double margin = kTieMargin * std::max(1.0, std::abs(bound_value));
  const std::size_t n = values.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool up_left = i == 0 || values[i].objective >= values[i - 1].objective;
    const bool up_right = i + 1 == n || values[i].objective >= values[i + 1].objective;
    if (!up_left || !up_right) continue;
    const double lo = grid[i == 0 ? 0 : i - 1];
    const double hi = grid[i + 1 == n ? n - 1 : i + 1];
    const ObjectivePoint cand = golden_max(f, lo, hi, cfg.tolerance, evaluations);
    if (cand.objective > bound_value + margin && cand.objective > best.objective) {
      best = cand;
      hit = BoundaryHit::None;
    }
  }

  Optimum opt;
  opt.eta_o_star = best.eta_o;
  opt.expected_threshold_star = 1.0 / best.eta_o;
  opt.theta_at = best.theta;
  opt.lambda_at = best.lambda;
  opt.objective_value = best.objective;
  opt.boundary_hit = hit;
  opt.evaluations = evaluations;
  return opt;
}

std::vector<ObjectivePoint> objective_profile(const ScenarioParams& p, const OptimizerConfig& cfg,
                                              unsigned n_points) {
  if (n_points < 2) throw DomainError("objective_profile needs at least 2 points");
  if (!(cfg.epsilon_rate > 0.0) || !(cfg.epsilon_rate < cfg.delta)) {
    throw DomainError("epsilon_rate must satisfy 0 < epsilon_rate < delta");
  }
  std::vector<ObjectivePoint> rows;
  rows.reserve(n_points);
  for (double eta : log_grid(cfg.epsilon_rate, cfg.delta, n_points)) {
    rows.push_back(evaluate_objective(p, eta));
  }
  return rows;
}

}  // namespace toff
