#pragma once

#include <cstdint>
#include <vector>

namespace mdsllt {

/// Finitely supported law on the integers: probs[i] is P(X = offset + i).
struct LatticeDistribution {
  std::int64_t offset = 0;
  std::vector<double> probs;

  static LatticeDistribution point_mass(std::int64_t x) { return {x, {1.0}}; }

  std::int64_t min_support() const { return offset; }
  std::int64_t max_support() const {
    return offset + static_cast<std::int64_t>(probs.size()) - 1;
  }
  /// P(X = x); zero outside the stored range.
  double at(std::int64_t x) const;
  double total() const;
  double mean() const;
  double variance() const;

  /// Throws std::invalid_argument unless the mass sums to 1 within `tol`
  /// and no entry is below -1e-15.
  void validate(double tol = 1e-12) const;

  /// Drops leading/trailing exact zeros.
  void trim();
};

LatticeDistribution convolve(const LatticeDistribution& a, const LatticeDistribution& b);

/// m-fold convolution of the law P(g = +-1) = a/2, P(g = 0) = 1 - a.
LatticeDistribution symmetric_step_sum(double a, int m);

/// Standard normal distribution function, absolute error below 1e-15.
double normal_cdf(double x);
double normal_pdf(double x);

/// sup_x |P(S <= x sigma sqrt(n)) - Phi(x)| for a lattice law of S. Both
/// one-sided limits of the distribution function are compared at every atom.
double kolmogorov_distance(const LatticeDistribution& dist, double sigma, std::int64_t n);

}  // namespace mdsllt
