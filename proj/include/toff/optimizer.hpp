#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "toff/renewal.hpp"

namespace toff {

struct OptimizerConfig {
  double delta = 0.0;         // 1/s, upper bound on the threshold rate
  double epsilon_rate = 0.0;  // 1/s, stands in for the zero-rate boundary
  unsigned grid_points = 200;
  double tolerance = 1e-10;  // relative, on the threshold rate

  /// delta = 1000 / femto mean, epsilon = delta * 1e-9.
  static OptimizerConfig defaults_for(const ScenarioParams& p);
  /// Bound given as a shortest admissible mean threshold (seconds).
  static double delta_from_min_threshold_mean(double seconds);

  /// Throws DomainError.
  void validate() const;
};

enum class BoundaryHit { None, Lower, Upper };
std::string_view to_string(BoundaryHit b);

struct Optimum {
  double eta_o_star = 0.0;
  double expected_threshold_star = 0.0;  // 1 / eta_o_star
  double objective_value = 0.0;
  double theta_at = 0.0;
  double lambda_at = 0.0;
  BoundaryHit boundary_hit = BoundaryHit::None;
  unsigned evaluations = 0;
};

struct ObjectivePoint {
  double eta_o;
  double theta;
  double lambda;
  double objective;  // theta + lambda
};

/// Theta + lambda at the given threshold rate (p.threshold_rate is ignored).
ObjectivePoint evaluate_objective(const ScenarioParams& p, double eta_o);
double objective(const ScenarioParams& p, double eta_o);

using ObjectiveFn = std::function<ObjectivePoint(double eta_o)>;

/// Maximizes `f` over [epsilon_rate, delta]: log-spaced grid, golden-section
/// refinement of every grid-local maximum, then comparison against both
/// bounds. An interior point must beat the better bound by a relative 1e-12
/// to count, so flat objectives report a boundary. Throws DomainError naming
/// the rate if `f` is not finite there.
Optimum maximize_objective(const ObjectiveFn& f, const OptimizerConfig& cfg);

/// maximize_objective applied to theta + lambda of the scenario.
Optimum find_optimal(const ScenarioParams& p, const OptimizerConfig& cfg);

/// Log-spaced profile over [epsilon_rate, delta]; the end rates are exactly
/// the configured bounds.
std::vector<ObjectivePoint> objective_profile(const ScenarioParams& p, const OptimizerConfig& cfg,
                                              unsigned n_points);

}  // namespace toff
