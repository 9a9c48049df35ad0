#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "toff/renewal.hpp"

namespace toff::testing {

// Reference setting: 600 s sessions, both cells 60 s on average, macro variance
// 60 s^2, femto variance 60000 s^2.
inline ScenarioParams reference_scenario(double threshold_mean_seconds) {
  return ScenarioParams{1.0 / 600.0, ResidenceLaw::gamma(60.0, 60.0),
                        ResidenceLaw::gamma(60.0, 60000.0), 1.0 / threshold_mean_seconds};
}

struct ReferenceColumn {
  double threshold_mean;
  double e_nt;
  double e_tt;
  double theta;   // fraction
  double lambda;  // fraction
};

// Reference analytic values, frozen.
inline const std::vector<ReferenceColumn>& reference_columns() {
  static const std::vector<ReferenceColumn> cols{
      {60.0, 5.74007, 192.43505, 0.4259933, 0.8125140},
      {120.0, 5.55835, 169.83760, 0.4441655, 0.7171013},
      {180.0, 5.45672, 154.62965, 0.4543281, 0.6528891},
      {240.0, 5.38896, 143.48846, 0.4611039, 0.6058480},
  };
  return cols;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Integral of f over [0, inf), split at `split` so that integrable endpoint
/// singularities at 0 are handled by tanh-sinh.
inline double integrate_half_line(const std::function<double(double)>& f, double split) {
  boost::math::quadrature::tanh_sinh<double> head;
  boost::math::quadrature::exp_sinh<double> tail;
  const double a = head.integrate(f, 0.0, split, 1e-14);
  const double b = tail.integrate([&](double t) { return f(split + t); }, 1e-14);
  return a + b;
}

/// Pearson chi-square p-value of observed counts against expected
/// probabilities; trailing cells are pooled until every expected count >= 5.
inline double chi_square_p_value(const std::vector<std::uint64_t>& observed,
                                 const std::function<double(unsigned)>& prob, std::uint64_t n) {
  std::vector<double> obs, expect;
  double used = 0.0;
  std::uint64_t seen = 0;
  for (unsigned k = 0;; ++k) {
    const double e = prob(k) * n;
    const double o = k < observed.size() ? static_cast<double>(observed[k]) : 0.0;
    if (e < 5.0) break;
    obs.push_back(o);
    expect.push_back(e);
    used += e;
    seen += static_cast<std::uint64_t>(o);
  }
  // Pooled tail cell.
  obs.push_back(static_cast<double>(n - seen));
  expect.push_back(static_cast<double>(n) - used);
  double stat = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    stat += (obs[i] - expect[i]) * (obs[i] - expect[i]) / expect[i];
  }
  const boost::math::chi_squared dist(static_cast<double>(obs.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Two-sided Kolmogorov-Smirnov statistic of `sample` against `cdf`.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

/// Critical value of the KS statistic at significance 0.01 (large n).
inline double ks_critical_001(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

}  // namespace toff::testing
