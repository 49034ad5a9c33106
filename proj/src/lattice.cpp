#include "mdsllt/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mdsllt {

double LatticeDistribution::at(std::int64_t x) const {
  if (x < offset || x > max_support()) return 0.0;
  return probs[static_cast<std::size_t>(x - offset)];
}

double LatticeDistribution::total() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

double LatticeDistribution::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    s += probs[i] * static_cast<double>(offset + static_cast<std::int64_t>(i));
  return s;
}

double LatticeDistribution::variance() const {
  const double m = mean();
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double x = static_cast<double>(offset + static_cast<std::int64_t>(i)) - m;
    s += probs[i] * x * x;
  }
  return s;
}

void LatticeDistribution::validate(double tol) const {
  for (double p : probs)
    if (p < -1e-15) throw std::invalid_argument("lattice distribution has a negative atom");
  const double t = total();
  if (std::abs(t - 1.0) > tol)
    throw std::invalid_argument("lattice distribution sums to " + std::to_string(t));
}

void LatticeDistribution::trim() {
  std::size_t lo = 0;
  while (lo < probs.size() && probs[lo] == 0.0) ++lo;
  if (lo == probs.size()) {
    probs.clear();
    return;
  }
  std::size_t hi = probs.size();
  while (probs[hi - 1] == 0.0) --hi;
  probs = std::vector<double>(probs.begin() + static_cast<std::ptrdiff_t>(lo),
                              probs.begin() + static_cast<std::ptrdiff_t>(hi));
  offset += static_cast<std::int64_t>(lo);
}

LatticeDistribution convolve(const LatticeDistribution& a, const LatticeDistribution& b) {
  if (a.probs.empty() || b.probs.empty()) return {};
  LatticeDistribution out;
  out.offset = a.offset + b.offset;
  out.probs.assign(a.probs.size() + b.probs.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.probs.size(); ++i) {
    const double pa = a.probs[i];
    if (pa == 0.0) continue;
    for (std::size_t j = 0; j < b.probs.size(); ++j) out.probs[i + j] += pa * b.probs[j];
  }
  return out;
}

LatticeDistribution symmetric_step_sum(double a, int m) {
  if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("noise parameter must lie in (0, 1]");
  if (m < 0) throw std::invalid_argument("number of summands must be nonnegative");
  const double side = a / 2.0;
  const double centre = 1.0 - a;
  // cur holds the law on [-k, k] after k steps.
  std::vector<double> cur{1.0};
  std::vector<double> next;
  for (int k = 0; k < m; ++k) {
    next.assign(cur.size() + 2, 0.0);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      next[i] += side * cur[i];
      next[i + 1] += centre * cur[i];
      next[i + 2] += side * cur[i];
    }
    cur.swap(next);
  }
  return {-static_cast<std::int64_t>(m), std::move(cur)};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double kolmogorov_distance(const LatticeDistribution& dist, double sigma, std::int64_t n) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  const double scale = sigma * std::sqrt(static_cast<double>(n));
  double below = 0.0;  // F(x-) at the current atom
  double sup = 0.0;
  for (std::size_t i = 0; i < dist.probs.size(); ++i) {
    const double p = dist.probs[i];
    if (p == 0.0) continue;
    const double x = static_cast<double>(dist.offset + static_cast<std::int64_t>(i)) / scale;
    const double phi = normal_cdf(x);
    const double at = below + p;
    sup = std::max({sup, std::abs(below - phi), std::abs(at - phi)});
    below = at;
  }
  return sup;
}

}  // namespace mdsllt
