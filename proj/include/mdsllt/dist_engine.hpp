#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mdsllt/construction.hpp"
#include "mdsllt/density.hpp"
#include "mdsllt/lattice.hpp"
#include "mdsllt/rng.hpp"
#include "mdsllt/tower.hpp"

namespace mdsllt {

/// Exact law of S_n(f) for a lattice model (weights in {0, 1}): the
/// occupancy law of the weight-one set mixed with symmetric_step_sum.
LatticeDistribution lattice_sum_distribution(const ProcessModel& model, std::int64_t n,
                                             const OccupancyOptions& opts = {});

/// `reps` independent draws of S_n(f) from a stationary start. Replicate i
/// belongs to block i / kMonteCarloBlock and uses stream (seed, block), so
/// the output does not depend on `workers`.
std::vector<double> sample_partial_sums(const ProcessModel& model, std::int64_t n, std::size_t reps,
                                        std::uint64_t seed, unsigned workers = default_workers());

/// Cell masses of a density on the grid left + i * step.
struct GridDensity {
  double left = 0.0;
  double step = 1.0;
  std::vector<double> masses;

  double total() const;
};

/// Exact cell integrals of `density` on cells [j step, (j + 1) step).
GridDensity discretize(const PiecewiseDensity& density, double step);

struct IntervalOptions {
  bool allow_grid = true;
  bool allow_monte_carlo = true;
  /// Finest grid step is max coefficient * 2^-max_refinement.
  int max_refinement = 14;
  /// Largest FFT length tried before the grid is coarsened.
  std::size_t grid_budget = std::size_t{1} << 22;
  /// Coarsest refinement accepted before falling back to Monte Carlo.
  int min_refinement = 6;
  std::size_t mc_reps = 1'000'000;
  std::uint64_t seed = 1;
  unsigned workers = default_workers();
};

struct IntervalProbability {
  enum class Method { Exact, Grid, MonteCarlo };
  double value = 0.0;
  /// Grid: bound on |value - truth|. Monte Carlo: one standard error.
  double error = 0.0;
  Method method = Method::Grid;
  double step = 0.0;  // grid step actually used
  std::size_t reps = 0;
};

/// P(|Sum_j c_j g_j| <= u) for i.i.d. g_j with density 1 on [-1,-1/2] U [1/2,1].
IntervalProbability interval_probability(const std::vector<double>& coefficients, double u,
                                         const IntervalOptions& opts = {});

/// Plain Monte Carlo estimate of the same probability.
IntervalProbability interval_probability_monte_carlo(const std::vector<double>& coefficients,
                                                     double u, std::size_t reps, std::uint64_t seed,
                                                     unsigned workers = default_workers());

}  // namespace mdsllt
