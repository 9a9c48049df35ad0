#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "toff/optimizer.hpp"
#include "toff/renewal.hpp"
#include "toff/simulator.hpp"

namespace toff {

/// Parsed scenario document. Layout (units are part of every key name):
///
///   [session]    mean_seconds
///   [macro]      family, mean_seconds, variance_seconds2
///   [femto]      family, mean_seconds, variance_seconds2
///   [threshold]  mean_seconds                      (optional section)
///   [simulation] replications, seed, counting_mode, batch_count, threads
///   [optimizer]  delta_per_second | min_threshold_mean_seconds,
///                epsilon_per_second, tolerance, grid_points
///
/// `#` and `;` start comments. Unknown sections or keys are rejected.
struct Scenario {
  double session_mean = 0.0;
  ResidenceLaw macro = ResidenceLaw::exponential(1.0);
  ResidenceLaw femto = ResidenceLaw::exponential(1.0);
  std::optional<double> threshold_mean;
  SimConfig simulation;
  std::optional<double> delta;  // 1/s
  std::optional<double> epsilon;
  std::optional<double> tolerance;
  std::optional<unsigned> grid_points;

  /// Requires a threshold mean (throws DomainError naming the key).
  ScenarioParams params() const;
  /// Parameters with an explicit threshold rate; the file's threshold is ignored.
  ScenarioParams params_at(double threshold_rate) const;
  OptimizerConfig optimizer() const;
};

/// Throws ParseError with the offending line.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);

/// Minimal document that parse_scenario accepts, for the given laws.
std::string scenario_text(double session_mean, const ResidenceLaw& macro,
                          const ResidenceLaw& femto);

}  // namespace toff
