#include "mdsllt/tower.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mdsllt/errors.hpp"

namespace mdsllt {
namespace {

constexpr double kMassInputTolerance = 1e-9;
constexpr double kRowTolerance = 1e-12;

void normalise_masses(std::vector<TowerSpec>& specs) {
  if (specs.empty()) throw MassSumError("tower system needs at least one tower");
  double total = 0.0;
  for (const auto& s : specs) {
    if (s.height < 1) throw std::invalid_argument("tower height must be at least 1");
    if (!(s.mass > 0.0)) throw MassSumError("tower mass must be positive");
    total += s.mass;
  }
  if (std::abs(total - 1.0) > kMassInputTolerance)
    throw MassSumError("tower masses sum to " + std::to_string(total));
  for (auto& s : specs) s.mass /= total;
}

std::vector<double> default_row(const std::vector<TowerSpec>& specs) {
  std::vector<double> row(specs.size());
  double z = 0.0;
  for (std::size_t l = 0; l < specs.size(); ++l) {
    row[l] = specs[l].mass / static_cast<double>(specs[l].height);
    z += row[l];
  }
  for (double& r : row) r /= z;
  return row;
}

std::size_t pick(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

}  // namespace

TowerSystem::TowerSystem(std::vector<TowerSpec> specs, std::vector<std::vector<double>> rows)
    : towers_(std::move(specs)), rows_(std::move(rows)) {
  begins_.resize(towers_.size());
  for (std::size_t l = 0; l < towers_.size(); ++l) {
    begins_[l] = state_count_;
    state_count_ += static_cast<std::size_t>(towers_[l].height);
  }
}

TowerSystem TowerSystem::build(std::vector<TowerSpec> specs, bool require_aperiodic) {
  normalise_masses(specs);
  auto row = default_row(specs);
  std::vector<std::vector<double>> rows(specs.size(), row);
  TowerSystem sys(std::move(specs), std::move(rows));
  if (require_aperiodic && !sys.aperiodic())
    throw PeriodicityError("gcd of tower heights is " + std::to_string(sys.height_gcd()));
  return sys;
}

TowerSystem TowerSystem::with_transitions(std::vector<TowerSpec> specs,
                                          std::vector<std::vector<double>> rows) {
  normalise_masses(specs);
  if (rows.size() != specs.size()) throw std::invalid_argument("one top row per tower required");
  for (const auto& row : rows) {
    if (row.size() != specs.size()) throw std::invalid_argument("top row has wrong length");
    double s = 0.0;
    for (double p : row) {
      if (p < 0.0) throw std::invalid_argument("negative transition probability");
      s += p;
    }
    if (std::abs(s - 1.0) > kRowTolerance) throw std::invalid_argument("top row does not sum to 1");
  }
  // The tower masses must stay stationary: inflow to each base equals its level measure.
  for (std::size_t d = 0; d < specs.size(); ++d) {
    double inflow = 0.0;
    for (std::size_t l = 0; l < specs.size(); ++l)
      inflow += specs[l].mass / static_cast<double>(specs[l].height) * rows[l][d];
    if (std::abs(inflow - specs[d].mass / static_cast<double>(specs[d].height)) > 1e-9)
      throw std::invalid_argument("top rows do not preserve the tower masses");
  }
  return TowerSystem(std::move(specs), std::move(rows));
}

std::size_t TowerSystem::index(TowerState s) const {
  check(s);
  return begins_[s.tower] + static_cast<std::size_t>(s.level);
}

TowerState TowerSystem::state(std::size_t index) const {
  if (index >= state_count_) throw InvalidState("flat state index out of range");
  const auto it = std::upper_bound(begins_.begin(), begins_.end(), index);
  const auto tower = static_cast<std::size_t>(it - begins_.begin()) - 1;
  return {tower, static_cast<std::int64_t>(index - begins_[tower])};
}

void TowerSystem::check(TowerState s) const {
  if (s.tower >= towers_.size()) throw InvalidState("tower index out of range");
  if (s.level < 0 || s.level >= towers_[s.tower].height)
    throw InvalidState("level " + std::to_string(s.level) + " outside tower " +
                       std::to_string(s.tower));
}

std::int64_t TowerSystem::min_height() const {
  std::int64_t h = towers_.front().height;
  for (const auto& t : towers_) h = std::min(h, t.height);
  return h;
}

std::int64_t TowerSystem::max_height() const {
  std::int64_t h = towers_.front().height;
  for (const auto& t : towers_) h = std::max(h, t.height);
  return h;
}

std::int64_t TowerSystem::height_gcd() const {
  std::int64_t g = 0;
  for (const auto& t : towers_) g = std::gcd(g, t.height);
  return g;
}

bool TowerSystem::uniform_rows() const {
  return std::all_of(rows_.begin(), rows_.end(), [&](const auto& r) { return r == rows_.front(); });
}

std::vector<double> stationary_measure(const TowerSystem& sys) {
  std::vector<double> pi(sys.state_count());
  for (std::size_t l = 0; l < sys.tower_count(); ++l) {
    const double w = sys.level_measure(l);
    const auto begin = sys.tower_begin(l);
    std::fill_n(pi.begin() + static_cast<std::ptrdiff_t>(begin), sys.towers()[l].height, w);
  }
  return pi;
}

std::vector<std::pair<TowerState, double>> step_distribution(const TowerSystem& sys, TowerState s) {
  sys.check(s);
  if (s.level + 1 < sys.towers()[s.tower].height) return {{{s.tower, s.level + 1}, 1.0}};
  std::vector<std::pair<TowerState, double>> out;
  const auto& row = sys.top_row(s.tower);
  for (std::size_t d = 0; d < row.size(); ++d)
    if (row[d] > 0.0) out.push_back({{d, 0}, row[d]});
  return out;
}

std::vector<double> push_forward(const TowerSystem& sys, const std::vector<double>& measure) {
  if (measure.size() != sys.state_count()) throw std::invalid_argument("measure has wrong length");
  std::vector<double> out(measure.size(), 0.0);
  for (std::size_t l = 0; l < sys.tower_count(); ++l) {
    const auto begin = sys.tower_begin(l);
    const auto h = static_cast<std::size_t>(sys.towers()[l].height);
    for (std::size_t j = 0; j + 1 < h; ++j) out[begin + j + 1] += measure[begin + j];
    const double top = measure[begin + h - 1];
    const auto& row = sys.top_row(l);
    for (std::size_t d = 0; d < row.size(); ++d) out[sys.tower_begin(d)] += top * row[d];
  }
  return out;
}

TrajectorySampler::TrajectorySampler(const TowerSystem& sys) : sys_(&sys) {
  double acc = 0.0;
  for (const auto& t : sys.towers()) tower_cdf_.push_back(acc += t.mass);
  for (std::size_t l = 0; l < sys.tower_count(); ++l) {
    std::vector<double> cdf;
    double c = 0.0;
    for (double p : sys.top_row(l)) cdf.push_back(c += p);
    row_cdf_.push_back(std::move(cdf));
  }
}

TowerState TrajectorySampler::draw_stationary(Substream& rng) const {
  const std::size_t tower = pick(tower_cdf_, rng.uniform() * tower_cdf_.back());
  const auto h = static_cast<double>(sys_->towers()[tower].height);
  auto level = static_cast<std::int64_t>(rng.uniform() * h);
  level = std::min(level, sys_->towers()[tower].height - 1);
  return {tower, level};
}

TowerState TrajectorySampler::step(TowerState s, Substream& rng) const {
  if (s.level + 1 < sys_->towers()[s.tower].height) return {s.tower, s.level + 1};
  const auto& cdf = row_cdf_[s.tower];
  return {pick(cdf, rng.uniform() * cdf.back()), 0};
}

std::vector<TowerState> sample_trajectory(const TowerSystem& sys, std::uint64_t seed, std::int64_t n,
                                          std::optional<TowerState> start) {
  if (n < 0) throw std::invalid_argument("trajectory length must be nonnegative");
  if (start) sys.check(*start);
  std::vector<TowerState> out;
  if (n == 0) return out;
  out.reserve(static_cast<std::size_t>(n));
  TrajectorySampler sampler(sys);
  Substream rng(seed, 0);
  TowerState s = start ? *start : sampler.draw_stationary(rng);
  out.push_back(s);
  for (std::int64_t i = 1; i < n; ++i) out.push_back(s = sampler.step(s, rng));
  return out;
}

namespace {

// Every window of length n crosses at most one tower top when all heights
// are >= n, so the count is a prefix-sum difference on the start tower plus
// a prefix sum on the destination tower.
OccupancyDistribution occupancy_tall(const TowerSystem& sys, const std::vector<char>& active,
                                     std::int64_t n) {
  const std::size_t K = sys.tower_count();
  std::vector<std::vector<std::int64_t>> prefix(K);
  for (std::size_t l = 0; l < K; ++l) {
    const auto h = static_cast<std::size_t>(sys.towers()[l].height);
    auto& pre = prefix[l];
    pre.assign(h + 1, 0);
    for (std::size_t j = 0; j < h; ++j) pre[j + 1] = pre[j] + (active[sys.tower_begin(l) + j] ? 1 : 0);
  }
  std::vector<double> counts(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::size_t l = 0; l < K; ++l) {
    const std::int64_t h = sys.towers()[l].height;
    const double w = sys.level_measure(l);
    const auto& pre = prefix[l];
    const auto& row = sys.top_row(l);
    for (std::int64_t j = 0; j < h; ++j) {
      if (j + n <= h) {
        counts[static_cast<std::size_t>(pre[j + n] - pre[j])] += w;
        continue;
      }
      const std::int64_t climb = pre[h] - pre[j];
      const std::int64_t rest = n - (h - j);
      for (std::size_t d = 0; d < K; ++d) {
        if (row[d] == 0.0) continue;
        counts[static_cast<std::size_t>(climb + prefix[d][rest])] += w * row[d];
      }
    }
  }
  return {n, {0, std::move(counts)}};
}

OccupancyDistribution occupancy_dp(const TowerSystem& sys, const std::vector<char>& active,
                                   std::int64_t n) {
  const std::size_t S = sys.state_count();
  const auto width = static_cast<std::size_t>(n) + 1;
  const auto pi = stationary_measure(sys);
  std::vector<double> cur(S * width, 0.0), next(S * width, 0.0);
  for (std::size_t s = 0; s < S; ++s) cur[s * width + (active[s] ? 1 : 0)] = pi[s];
  for (std::int64_t step = 1; step < n; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    const auto filled = static_cast<std::size_t>(step);  // `step` states visited so far
    for (std::size_t l = 0; l < sys.tower_count(); ++l) {
      const auto begin = sys.tower_begin(l);
      const auto h = static_cast<std::size_t>(sys.towers()[l].height);
      for (std::size_t j = 0; j + 1 < h; ++j) {
        const std::size_t from = begin + j, to = from + 1;
        const std::size_t add = active[to] ? 1 : 0;
        for (std::size_t c = 0; c <= filled; ++c)
          if (cur[from * width + c] != 0.0) next[to * width + c + add] += cur[from * width + c];
      }
      const std::size_t top = begin + h - 1;
      const auto& row = sys.top_row(l);
      for (std::size_t d = 0; d < row.size(); ++d) {
        if (row[d] == 0.0) continue;
        const std::size_t to = sys.tower_begin(d);
        const std::size_t add = active[to] ? 1 : 0;
        for (std::size_t c = 0; c <= filled; ++c)
          if (cur[top * width + c] != 0.0) next[to * width + c + add] += cur[top * width + c] * row[d];
      }
    }
    cur.swap(next);
  }
  std::vector<double> counts(width, 0.0);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t c = 0; c < width; ++c) counts[c] += cur[s * width + c];
  return {n, {0, std::move(counts)}};
}

}  // namespace

OccupancyDistribution occupancy_distribution(const TowerSystem& sys, const std::vector<char>& active,
                                             std::int64_t n, const OccupancyOptions& opts) {
  if (n < 1) throw std::invalid_argument("occupancy window must be at least 1");
  if (active.size() != sys.state_count()) throw std::invalid_argument("active mask has wrong length");
  auto method = opts.method;
  if (method == OccupancyMethod::Auto)
    method = sys.min_height() >= n ? OccupancyMethod::TallTowers : OccupancyMethod::DynamicProgram;
  if (method == OccupancyMethod::TallTowers) {
    if (sys.min_height() < n)
      throw std::invalid_argument("tall-tower occupancy needs every height >= window");
    return occupancy_tall(sys, active, n);
  }
  const double ops = static_cast<double>(sys.state_count()) * static_cast<double>(n) *
                     static_cast<double>(n);
  if (ops > opts.op_budget)
    throw WindowTooLarge("occupancy dynamic program needs " + std::to_string(ops) +
                         " operations, budget " + std::to_string(opts.op_budget));
  return occupancy_dp(sys, active, n);
}

OccupancyDistribution occupancy_distribution(const TowerSystem& sys,
                                             const std::function<bool(TowerState)>& active,
                                             std::int64_t n, const OccupancyOptions& opts) {
  std::vector<char> mask(sys.state_count());
  for (std::size_t s = 0; s < mask.size(); ++s) mask[s] = active(sys.state(s)) ? 1 : 0;
  return occupancy_distribution(sys, mask, n, opts);
}

}  // namespace mdsllt
