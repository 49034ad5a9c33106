#include "mdsllt/dist_engine.hpp"

#include <stdexcept>

#include "mdsllt/errors.hpp"

namespace mdsllt {

LatticeDistribution lattice_sum_distribution(const ProcessModel& model, std::int64_t n,
                                             const OccupancyOptions& opts) {
  if (n < 1) throw std::invalid_argument("window must be at least 1");
  if (model.noise.kind != NoiseSpec::Kind::Lattice)
    throw VariantMismatch("lattice_sum_distribution needs lattice noise");
  std::vector<char> active(model.weight.size());
  for (std::size_t i = 0; i < active.size(); ++i) {
    const double w = model.weight[i];
    if (w != 0.0 && w != 1.0) throw VariantMismatch("lattice models need weights in {0, 1}");
    active[i] = w == 1.0;
  }
  const auto occ = occupancy_distribution(model.system, active, n, opts);

  // out[x + n] = P(S_n = x); walk holds the m-step law centred at index n.
  const auto width = static_cast<std::size_t>(2 * n + 1);
  std::vector<double> out(width, 0.0), walk(width, 0.0), next(width, 0.0);
  const auto centre = static_cast<std::size_t>(n);
  walk[centre] = 1.0;
  const double a = model.noise.a;
  const double side = a / 2.0, stay = 1.0 - a;
  for (std::int64_t m = 0; m <= n; ++m) {
    const double w = occ.counts.at(m);
    if (w != 0.0) {
      const auto lo = centre - static_cast<std::size_t>(m), hi = centre + static_cast<std::size_t>(m);
      for (std::size_t i = lo; i <= hi; ++i) out[i] += w * walk[i];
    }
    if (m == n) break;
    const auto lo = centre - static_cast<std::size_t>(m + 1);
    const auto hi = centre + static_cast<std::size_t>(m + 1);
    for (std::size_t i = lo; i <= hi; ++i) {
      double v = stay * walk[i];
      if (i > 0) v += side * walk[i - 1];
      if (i + 1 < width) v += side * walk[i + 1];
      next[i] = v;
    }
    std::swap(walk, next);
  }
  LatticeDistribution dist{-n, std::move(out)};
  return dist;
}

std::vector<double> sample_partial_sums(const ProcessModel& model, std::int64_t n, std::size_t reps,
                                        std::uint64_t seed, unsigned workers) {
  if (n < 1) throw std::invalid_argument("window must be at least 1");
  if (reps < 1) throw std::invalid_argument("need at least one replicate");
  std::vector<double> out(reps);
  const TrajectorySampler sampler(model.system);
  for_each_block(reps, workers, [&](std::size_t block, std::size_t begin, std::size_t end) {
    Substream rng(seed, block);
    for (std::size_t r = begin; r < end; ++r) {
      TowerState s = sampler.draw_stationary(rng);
      double sum = 0.0;
      for (std::int64_t i = 0;; ++i) {
        const double w = model.weight[model.system.index(s)];
        const double g = model.noise.draw(rng.uniform());
        sum += w * g;
        if (i + 1 == n) break;
        s = sampler.step(s, rng);
      }
      out[r] = sum;
    }
  });
  return out;
}

}  // namespace mdsllt
