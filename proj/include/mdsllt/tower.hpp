#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "mdsllt/lattice.hpp"
#include "mdsllt/rng.hpp"

namespace mdsllt {

/// One Rokhlin tower: `height` levels of equal measure, total measure `mass`.
struct TowerSpec {
  std::int64_t height = 1;
  double mass = 1.0;
};

struct TowerState {
  std::size_t tower = 0;
  std::int64_t level = 0;

  friend auto operator<=>(const TowerState&, const TowerState&) = default;
};

/// A finite family of towers glued at the top: a point on the highest level
/// of tower l moves to the base of tower d with probability top_row(l)[d],
/// and otherwise climbs one level. This is the finite stand-in for the
/// measure-preserving map T.
///
/// States are also addressed by a flat index: tower 0 levels 0..N_0-1, then
/// tower 1, and so on.
class TowerSystem {
 public:
  /// A single fixed point.
  TowerSystem() : TowerSystem({{1, 1.0}}, {{1.0}}) {}

  /// Builds the system with the default top law, destination d drawn with
  /// probability proportional to mass_d / height_d. Masses must sum to 1
  /// within 1e-9 and are renormalised.
  static TowerSystem build(std::vector<TowerSpec> specs, bool require_aperiodic = false);

  /// Same, with caller-supplied top transition rows.
  static TowerSystem with_transitions(std::vector<TowerSpec> specs,
                                      std::vector<std::vector<double>> rows);

  const std::vector<TowerSpec>& towers() const { return towers_; }
  std::size_t tower_count() const { return towers_.size(); }
  std::size_t state_count() const { return state_count_; }
  const std::vector<double>& top_row(std::size_t tower) const { return rows_.at(tower); }

  /// Stationary measure of any single level of `tower`, i.e. mass / height.
  double level_measure(std::size_t tower) const {
    return towers_[tower].mass / static_cast<double>(towers_[tower].height);
  }

  std::size_t index(TowerState s) const;
  TowerState state(std::size_t index) const;
  std::size_t tower_begin(std::size_t tower) const { return begins_[tower]; }

  void check(TowerState s) const;

  std::int64_t min_height() const;
  std::int64_t max_height() const;
  std::int64_t height_gcd() const;
  bool aperiodic() const { return height_gcd() == 1; }
  /// True when every tower shares one top row (the default law always does).
  bool uniform_rows() const;

 private:
  TowerSystem(std::vector<TowerSpec> specs, std::vector<std::vector<double>> rows);

  std::vector<TowerSpec> towers_;
  std::vector<std::vector<double>> rows_;
  std::vector<std::size_t> begins_;
  std::size_t state_count_ = 0;
};

/// Stationary measure indexed by flat state: every level of tower l weighs
/// mass_l / height_l.
std::vector<double> stationary_measure(const TowerSystem& sys);

/// Law of the successor of `s`.
std::vector<std::pair<TowerState, double>> step_distribution(const TowerSystem& sys, TowerState s);

/// Image of a measure (flat-indexed) under one step of the dynamics.
std::vector<double> push_forward(const TowerSystem& sys, const std::vector<double>& measure);

/// Draws states from the stationary law and steps trajectories.
class TrajectorySampler {
 public:
  explicit TrajectorySampler(const TowerSystem& sys);

  TowerState draw_stationary(Substream& rng) const;
  TowerState step(TowerState s, Substream& rng) const;

 private:
  const TowerSystem* sys_;
  std::vector<double> tower_cdf_;
  std::vector<std::vector<double>> row_cdf_;
};

/// Trajectory of length n. The start is drawn from the stationary measure
/// unless given.
std::vector<TowerState> sample_trajectory(const TowerSystem& sys, std::uint64_t seed, std::int64_t n,
                                          std::optional<TowerState> start = std::nullopt);

struct OccupancyDistribution {
  std::int64_t window = 0;
  LatticeDistribution counts;  // law of the number of active steps, on [0, window]
};

enum class OccupancyMethod { Auto, TallTowers, DynamicProgram };

struct OccupancyOptions {
  OccupancyMethod method = OccupancyMethod::Auto;
  /// Cap on states * n * n for the dynamic program.
  double op_budget = 1e9;
};

/// Exact law of #{0 <= i < n : T^i(w) active} for a stationary start.
/// `active` is indexed by flat state.
OccupancyDistribution occupancy_distribution(const TowerSystem& sys, const std::vector<char>& active,
                                             std::int64_t n, const OccupancyOptions& opts = {});

OccupancyDistribution occupancy_distribution(const TowerSystem& sys,
                                             const std::function<bool(TowerState)>& active,
                                             std::int64_t n, const OccupancyOptions& opts = {});

}  // namespace mdsllt
