#include "toff/residence.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "toff/error.hpp"

namespace toff {
namespace {

// Below this argument the closed forms lose digits to cancellation and the
// power series in the argument are used instead.
constexpr double kSeriesCutoff = 0.1;

void require_nonnegative(double s, const char* what) {
  if (!(s >= 0.0) || !std::isfinite(s)) {
    throw DomainError(std::string(what) + ": transform argument must be finite and >= 0, got " +
                      std::to_string(s));
  }
}

// (1 + z)^(-k) - 1 + k z, divided by z.
double convexity_gap_over_z(double k, double z) {
  if (z < kSeriesCutoff) {
    // sum_{n>=2} (-1)^n [k]_n / n! z^(n-1), [k]_n the rising factorial.
    double coeff = k * (k + 1.0) / 2.0;
    double power = z;
    double sum = 0.0;
    for (int n = 2; n < 400; ++n) {
      const double term = coeff * power;
      sum += (n % 2 == 0) ? term : -term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      coeff *= (k + n) / (n + 1.0);
      power *= z;
    }
    return sum;
  }
  return (std::expm1(-k * std::log1p(z)) + k * z) / z;
}

}  // namespace

std::string_view to_string(Family family) {
  return family == Family::Gamma ? "gamma" : "exponential";
}

Family parse_family(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "gamma") return Family::Gamma;
  if (lower == "exponential") return Family::Exponential;
  throw DomainError("unknown distribution family '" + std::string(text) +
                    "' (expected gamma or exponential)");
}

ResidenceLaw::ResidenceLaw(Family family, double mean, double variance)
    : family_(family),
      mean_(mean),
      variance_(variance),
      shape_(mean * mean / variance),
      rate_(mean / variance) {}

ResidenceLaw ResidenceLaw::from_moments(Family family, double mean, double variance) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw DomainError("mean must be finite and > 0, got " + std::to_string(mean));
  }
  if (family == Family::Exponential) return ResidenceLaw(family, mean, mean * mean);
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw DomainError("variance must be finite and > 0, got " + std::to_string(variance));
  }
  return ResidenceLaw(family, mean, variance);
}

double ResidenceLaw::pdf(double t) const {
  if (t < 0.0) return 0.0;
  if (t == 0.0) {
    if (shape_ < 1.0) return std::numeric_limits<double>::infinity();
    return shape_ == 1.0 ? rate_ : 0.0;
  }
  return std::exp(shape_ * std::log(rate_) + (shape_ - 1.0) * std::log(t) - rate_ * t -
                  std::lgamma(shape_));
}

double ResidenceLaw::log_laplace(double s) const {
  require_nonnegative(s, "laplace");
  return -shape_ * std::log1p(s / rate_);
}

double ResidenceLaw::laplace(double s) const { return std::exp(log_laplace(s)); }

double ResidenceLaw::laplace_complement(double s) const { return -std::expm1(log_laplace(s)); }

double ResidenceLaw::weighted_moment(double s) const {
  return shape_ / (rate_ + s) * laplace(s);
}

double ResidenceLaw::residual_laplace(double s) const {
  require_nonnegative(s, "residual_laplace");
  if (s == 0.0) return 1.0;
  return laplace_complement(s) / (mean_ * s);
}

double ResidenceLaw::residual_weighted_moment(double s) const {
  require_nonnegative(s, "residual_weighted_moment");
  if (s == 0.0) return (variance_ + mean_ * mean_) / (2.0 * mean_);
  const double x = s / rate_;
  const double k = shape_;
  if (x < kSeriesCutoff) {
    // (1/(mean rate^2)) sum_{n>=2} (-x)^(n-2) (n-1) [k]_n / n!
    double coeff = k * (k + 1.0) / 2.0;
    double power = 1.0;
    double sum = 0.0;
    for (int n = 2; n < 400; ++n) {
      const double term = (n - 1) * coeff * power;
      sum += (n % 2 == 0) ? term : -term;
      if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
      coeff *= (k + n) / (n + 1.0);
      power *= x;
    }
    return sum / (mean_ * rate_ * rate_);
  }
  // 1 - L(s) - s W(s) with L = (1+x)^-k and s W = k x/(1+x) L.
  const double log_l = -k * std::log1p(x);
  const double numer = -std::expm1(log_l) - std::exp(log_l) * k * x / (1.0 + x);
  return numer / (mean_ * s * s);
}

double ResidenceLaw::laplace_drop(double s, double h) const {
  require_nonnegative(s, "laplace_drop");
  require_nonnegative(h, "laplace_drop");
  return -std::expm1(-shape_ * std::log1p(h / (rate_ + s)));
}

double ResidenceLaw::secant_gap(double s, double h) const {
  require_nonnegative(s, "secant_gap");
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DomainError("secant_gap: step must be finite and > 0");
  }
  const double z = h / (rate_ + s);
  return laplace(s) / (rate_ + s) * convexity_gap_over_z(shape_, z);
}

double sample_standard_gamma(double shape, RandomStream& rs) {
  if (shape < 1.0) {
    // Gamma(k) = Gamma(k + 1) * U^(1/k); the power is taken in log space.
    const double boosted = sample_standard_gamma(shape + 1.0, rs);
    return boosted * std::exp(std::log(rs.uniform()) / shape);
  }
  // Marsaglia & Tsang squeeze-rejection.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = rs.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rs.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double ResidenceLaw::sample(RandomStream& rs) const {
  if (family_ == Family::Exponential) return rs.exponential(rate_);
  return sample_standard_gamma(shape_, rs) / rate_;
}

double ResidenceLaw::residual_sample(RandomStream& rs) const {
  const double length_biased = sample_standard_gamma(shape_ + 1.0, rs) / rate_;
  return rs.uniform() * length_biased;
}

}  // namespace toff
