#include "mdsllt/density.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mdsllt {

double PiecewiseDensity::value_at(double x) const {
  if (breakpoints.size() < 2 || x < breakpoints.front() || x >= breakpoints.back()) return 0.0;
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
  return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

double PiecewiseDensity::integral() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    s += values[i] * (breakpoints[i + 1] - breakpoints[i]);
  return s;
}

double PiecewiseDensity::max_value() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, v);
  return m;
}

double PiecewiseDensity::mass_between(double lo, double hi) const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double a = std::max(lo, breakpoints[i]);
    const double b = std::min(hi, breakpoints[i + 1]);
    if (b > a) s += values[i] * (b - a);
  }
  return s;
}

double PiecewiseDensity::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double a = breakpoints[i], b = breakpoints[i + 1];
    s += values[i] * (b * b - a * a) / 2.0;
  }
  return s;
}

double PiecewiseDensity::second_moment() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double a = breakpoints[i], b = breakpoints[i + 1];
    s += values[i] * (b * b * b - a * a * a) / 3.0;
  }
  return s;
}

void PiecewiseDensity::validate(double tol) const {
  if (breakpoints.size() != values.size() + 1)
    throw std::invalid_argument("density needs one more breakpoint than values");
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    if (!(breakpoints[i] < breakpoints[i + 1]))
      throw std::invalid_argument("density breakpoints must increase");
  for (double v : values)
    if (v < 0.0) throw std::invalid_argument("density must be nonnegative");
  if (std::abs(integral() - 1.0) > tol) throw std::invalid_argument("density does not integrate to 1");
}

PiecewiseDensity two_interval_uniform_density() {
  return {{-1.0, -0.5, 0.5, 1.0}, {1.0, 0.0, 1.0}};
}

PiecewiseDensity scaled(const PiecewiseDensity& density, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("scale must be positive");
  PiecewiseDensity out = density;
  for (double& b : out.breakpoints) b *= c;
  for (double& v : out.values) v /= c;
  return out;
}

}  // namespace mdsllt
