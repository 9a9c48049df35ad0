#pragma once

#include <string>
#include <string_view>

#include "toff/random_stream.hpp"

namespace toff {

enum class Family { Gamma, Exponential };

std::string_view to_string(Family family);
/// Accepts "gamma" or "exponential" (case-insensitive). Throws DomainError.
Family parse_family(std::string_view text);

/// Cell residence-time law, specified by its first two moments.
///
/// Internally every law is a Gamma(shape, rate) with shape = mean^2/variance
/// and rate = mean/variance; the exponential family is the shape-1 member.
/// Transforms are evaluated in log space so heavy-variance laws with shape
/// far below one stay finite. Objects are immutable and thread-safe.
class ResidenceLaw {
 public:
  /// Throws DomainError unless mean > 0 and (for Gamma) variance > 0.
  /// For Exponential the variance argument is ignored and set to mean^2.
  static ResidenceLaw from_moments(Family family, double mean, double variance = 0.0);
  static ResidenceLaw exponential(double mean) { return from_moments(Family::Exponential, mean); }
  static ResidenceLaw gamma(double mean, double variance) {
    return from_moments(Family::Gamma, mean, variance);
  }

  Family family() const noexcept { return family_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }
  double shape() const noexcept { return shape_; }
  double rate() const noexcept { return rate_; }

  double pdf(double t) const;

  /// E[exp(-s T)], s >= 0.
  double laplace(double s) const;
  double log_laplace(double s) const;
  /// 1 - laplace(s), without cancellation for small s.
  double laplace_complement(double s) const;
  /// E[T exp(-s T)] = -d/ds laplace(s), s >= 0.
  double weighted_moment(double s) const;

  /// Transform of the equilibrium (residual-life) law: (1 - laplace(s)) / (mean s).
  /// The s = 0 limit is 1.
  double residual_laplace(double s) const;
  /// E[psi exp(-s psi)] for psi drawn from the equilibrium law. The s = 0 limit
  /// is the mean residual life (variance + mean^2) / (2 mean).
  double residual_weighted_moment(double s) const;

  /// 1 - laplace(s + h) / laplace(s): the probability that an independent
  /// Exp(h) clock fires before T, given T survives an Exp(s) clock.
  double laplace_drop(double s, double h) const;
  /// weighted_moment(s) - (laplace(s) - laplace(s + h)) / h >= 0, the
  /// secant-vs-tangent gap of the convex transform, evaluated stably for
  /// small h.
  double secant_gap(double s, double h) const;

  double sample(RandomStream& rs) const;
  /// Draw from the equilibrium law: U * X with X length-biased.
  double residual_sample(RandomStream& rs) const;

 private:
  ResidenceLaw(Family family, double mean, double variance);

  Family family_;
  double mean_;
  double variance_;
  double shape_;
  double rate_;
};

/// Gamma(shape, 1) variate; shape < 1 is handled by boosting from shape + 1.
double sample_standard_gamma(double shape, RandomStream& rs);

}  // namespace toff
