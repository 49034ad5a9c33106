#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <stdexcept>

#include "mdsllt/dist_engine.hpp"
#include "mdsllt/errors.hpp"

namespace mdsllt {

double GridDensity::total() const {
  double s = 0.0;
  for (double m : masses) s += m;
  return s;
}

GridDensity discretize(const PiecewiseDensity& density, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be positive");
  if (density.breakpoints.size() < 2) return {0.0, step, {}};
  const double lo = std::floor(density.breakpoints.front() / step);
  const double hi = std::ceil(density.breakpoints.back() / step);
  GridDensity g{lo * step, step, {}};
  const auto cells = static_cast<std::size_t>(hi - lo);
  g.masses.resize(cells);
  for (std::size_t j = 0; j < cells; ++j) {
    const double a = (lo + static_cast<double>(j)) * step;
    g.masses[j] = density.mass_between(a, a + step);
  }
  return g;
}

namespace {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

std::size_t next_pow2(double x) {
  std::size_t n = 1;
  while (static_cast<double>(n) < x) n <<= 1;
  return n;
}

// Hoeffding radius beyond which the lattice part carries mass below tail.
double tail_radius(const std::map<double, int>& groups, double step, double tail) {
  double s2 = 0.0;
  for (const auto& [c, count] : groups) s2 += count * (c + step / 2.0) * (c + step / 2.0);
  return std::sqrt(2.0 * s2 * std::log(2.0 / tail));
}

// P(W in [lo, hi]) where W is the sum of `count` independent uniforms on
// [-step/2, step/2]; exact for count <= 2, normal beyond.
double smoothing_mass(double lo, double hi, std::int64_t count, double step) {
  if (count == 1) {
    const double a = std::max(lo, -step / 2.0), b = std::min(hi, step / 2.0);
    return b > a ? (b - a) / step : 0.0;
  }
  if (count == 2) {
    auto cdf = [step](double x) {
      if (x <= -step) return 0.0;
      if (x >= step) return 1.0;
      if (x <= 0.0) return (x + step) * (x + step) / (2.0 * step * step);
      return 1.0 - (step - x) * (step - x) / (2.0 * step * step);
    };
    return cdf(hi) - cdf(lo);
  }
  const double sd = step * std::sqrt(static_cast<double>(count) / 12.0);
  return normal_cdf(hi / sd) - normal_cdf(lo / sd);
}

struct GridResult {
  double value = 0.0;
  double misalignment = 0.0;
};

constexpr double kTail = 1e-12;

std::size_t fft_length(const std::map<double, int>& groups, std::int64_t count, double u,
                       double step) {
  const double t = tail_radius(groups, step, kTail);
  const double pad = std::max(40.0 * step * std::sqrt(count / 12.0), count * step);
  return next_pow2((t + u + pad) / step + static_cast<double>(count) + 4.0);
}

GridResult grid_probability(const std::map<double, int>& groups, std::int64_t count, double u,
                            double step, std::size_t L) {
  const PiecewiseDensity base = two_interval_uniform_density();
  const std::size_t spectrum = L / 2 + 1;
  RealBuffer real(static_cast<double*>(fftw_malloc(sizeof(double) * L)));
  ComplexBuffer freq(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * spectrum)));
  ComplexBuffer acc(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * spectrum)));
  if (!real || !freq || !acc) throw std::bad_alloc();
  const fftw_plan forward = fftw_plan_dft_r2c_1d(static_cast<int>(L), real.get(), freq.get(),
                                                 FFTW_ESTIMATE);
  const fftw_plan backward = fftw_plan_dft_c2r_1d(static_cast<int>(L), acc.get(), real.get(),
                                                  FFTW_ESTIMATE);
  for (std::size_t i = 0; i < spectrum; ++i) acc[i][0] = 1.0, acc[i][1] = 0.0;

  GridResult r;
  const auto Ls = static_cast<std::int64_t>(L);
  for (const auto& [c, mult] : groups) {
    const GridDensity cells = discretize(scaled(base, c), step);
    const auto first = static_cast<std::int64_t>(std::llround(cells.left / step));
    std::fill(real.get(), real.get() + L, 0.0);
    double misaligned = 0.0;
    for (std::size_t j = 0; j < cells.masses.size(); ++j) {
      const std::int64_t k = first + static_cast<std::int64_t>(j);
      real[static_cast<std::size_t>(((k % Ls) + Ls) % Ls)] += cells.masses[j];
      const double a = static_cast<double>(k) * step, b = a + step;
      for (double x : {-c, -c / 2.0, c / 2.0, c})
        if (x > a && x < b) {
          misaligned += cells.masses[j];
          break;
        }
    }
    r.misalignment += mult * misaligned;
    fftw_execute(forward);
    for (std::size_t i = 0; i < spectrum; ++i) {
      std::complex<double> z(freq[i][0], freq[i][1]), p(1.0, 0.0);
      for (int e = mult; e > 0; e >>= 1) {
        if (e & 1) p *= z;
        z *= z;
      }
      const std::complex<double> cur(acc[i][0], acc[i][1]);
      const auto v = cur * p;
      acc[i][0] = v.real();
      acc[i][1] = v.imag();
    }
  }
  fftw_execute(backward);
  fftw_destroy_plan(forward);
  fftw_destroy_plan(backward);

  // Lattice part takes values (K + count/2) * step.
  const double half = static_cast<double>(count) / 2.0;
  const double pad = std::max(40.0 * step * std::sqrt(count / 12.0), count * step);
  const auto kmin = static_cast<std::int64_t>(std::floor((-u - pad) / step - half)) - 1;
  const auto kmax = static_cast<std::int64_t>(std::ceil((u + pad) / step - half)) + 1;
  double sum = 0.0;
  for (std::int64_t K = kmin; K <= kmax; ++K) {
    const double p = real[static_cast<std::size_t>(((K % Ls) + Ls) % Ls)] / static_cast<double>(L);
    if (p == 0.0) continue;
    const double centre = (static_cast<double>(K) + half) * step;
    sum += p * smoothing_mass(-u - centre, u - centre, count, step);
  }
  r.value = std::clamp(sum, 0.0, 1.0);
  return r;
}

}  // namespace

IntervalProbability interval_probability_monte_carlo(const std::vector<double>& coefficients,
                                                     double u, std::size_t reps, std::uint64_t seed,
                                                     unsigned workers) {
  if (reps == 0) throw std::invalid_argument("need at least one replicate");
  const NoiseSpec g = NoiseSpec::two_interval();
  const std::size_t blocks = (reps + kMonteCarloBlock - 1) / kMonteCarloBlock;
  std::vector<std::size_t> hits(blocks, 0);
  for_each_block(reps, workers, [&](std::size_t block, std::size_t begin, std::size_t end) {
    Substream rng(seed, block);
    std::size_t h = 0;
    for (std::size_t r = begin; r < end; ++r) {
      double s = 0.0;
      for (double c : coefficients) s += c * g.draw(rng.uniform());
      if (std::abs(s) <= u) ++h;
    }
    hits[block] = h;
  });
  std::size_t total = 0;
  for (auto h : hits) total += h;
  IntervalProbability out;
  out.method = IntervalProbability::Method::MonteCarlo;
  out.reps = reps;
  out.value = static_cast<double>(total) / static_cast<double>(reps);
  out.error = std::sqrt(out.value * (1.0 - out.value) / static_cast<double>(reps));
  return out;
}

IntervalProbability interval_probability(const std::vector<double>& coefficients, double u,
                                         const IntervalOptions& opts) {
  if (!(u >= 0.0) || !std::isfinite(u)) throw std::invalid_argument("u must be finite and >= 0");
  std::map<double, int> groups;
  std::int64_t count = 0;
  for (double c : coefficients) {
    if (!(c >= 0.0) || !std::isfinite(c))
      throw std::invalid_argument("coefficients must be finite and nonnegative");
    if (c > 0.0) {
      ++groups[c];
      ++count;
    }
  }
  if (groups.empty()) return {1.0, 0.0, IntervalProbability::Method::Exact, 0.0, 0};

  if (opts.allow_grid) {
    const double cmax = groups.rbegin()->first;
    for (int m = opts.max_refinement; m >= opts.min_refinement; --m) {
      const double step = std::ldexp(cmax, -m);
      const std::size_t L = fft_length(groups, count, u, step);
      if (L > opts.grid_budget) continue;
      const std::size_t Lc = fft_length(groups, count, u, 2.0 * step);
      const GridResult fine = grid_probability(groups, count, u, step, L);
      const GridResult coarse = grid_probability(groups, count, u, 2.0 * step, Lc);
      IntervalProbability out;
      out.method = IntervalProbability::Method::Grid;
      out.step = step;
      out.value = fine.value;
      out.error = std::abs(fine.value - coarse.value) + 2.0 * kTail + fine.misalignment;
      return out;
    }
  }
  if (opts.allow_monte_carlo)
    return interval_probability_monte_carlo(coefficients, u, opts.mc_reps, opts.seed, opts.workers);
  throw BudgetExceeded("interval probability: grid over budget and Monte Carlo disabled");
}

}  // namespace mdsllt
