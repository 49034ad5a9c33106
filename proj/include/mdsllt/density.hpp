#pragma once

#include <cstddef>
#include <vector>

namespace mdsllt {

/// Piecewise-constant density: values[i] on [breakpoints[i], breakpoints[i+1]),
/// zero outside [breakpoints.front(), breakpoints.back()].
struct PiecewiseDensity {
  std::vector<double> breakpoints;
  std::vector<double> values;

  double value_at(double x) const;
  double integral() const;
  double max_value() const;
  /// Integral of the density over [lo, hi].
  double mass_between(double lo, double hi) const;
  double mean() const;
  double second_moment() const;

  /// Throws std::invalid_argument on negative values, unsorted breakpoints
  /// or a total integral further than `tol` from 1.
  void validate(double tol = 1e-10) const;
};

/// Density 1 on [-1, -1/2] and [1/2, 1].
PiecewiseDensity two_interval_uniform_density();

/// Density of c * X for c > 0.
PiecewiseDensity scaled(const PiecewiseDensity& density, double c);

}  // namespace mdsllt
