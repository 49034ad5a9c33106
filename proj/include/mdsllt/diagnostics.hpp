#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mdsllt/construction.hpp"
#include "mdsllt/dist_engine.hpp"
#include "mdsllt/lattice.hpp"
#include "mdsllt/tower.hpp"

namespace mdsllt {

enum class Direction { AtLeast, AtMost };
enum class Method { Exact, Grid, MonteCarlo };

std::string to_string(Direction d);
std::string to_string(Method m);

/// One checked inequality. `error` is the error bar the decision uses:
/// pass iff value - bound (AtLeast) or bound - value (AtMost) is at least
/// error - tolerance, and every entry of `checks` holds.
struct ProbeResult {
  std::string name;
  int k = -1;  // schedule index, -1 when the probe is not indexed
  std::int64_t n = 0;
  double value = 0.0;
  double bound = 0.0;
  Direction direction = Direction::AtLeast;
  Method method = Method::Exact;
  double error = 0.0;
  double tolerance = 0.0;  // rounding slack allowed against the bound
  bool pass = false;
  /// Named intermediate quantities reported alongside the main value.
  std::vector<std::pair<std::string, double>> extras;
  /// Secondary conditions that must also hold for a pass.
  std::vector<std::pair<std::string, bool>> checks;

  double extra(const std::string& key) const;
  bool has_extra(const std::string& key) const;
  void decide();
};

/// Tolerance of exact probes: the inequality must hold with at least this margin.
inline constexpr double kExactMargin = 1e-9;

struct ProbeOptions {
  std::uint64_t seed = 1;
  std::size_t mc_reps = 100'000;
  unsigned workers = default_workers();
  OccupancyOptions occupancy{};
  IntervalOptions interval{};
};

// Closed-form bounds, shared with certificate verification.
namespace bounds {
double llt(const Schedule& s, int k);               // a_{n_k}
double clt_lattice(const Schedule& s, int k);       // a_{n_k} / 2
double thm1_intermediate(const Schedule& s, int k);  // d_k (1 - rho_k)
double thm3_intermediate(const Schedule& s, int k);  // p_k / 4
double mixing(const Schedule& s, int k);            // 7 eps_k
double density(const Schedule& s);                  // L1 + L2
double ratio(const Schedule& s);                    // L
}  // namespace bounds

/// mu(S_{n_k} = 0) against a_{n_k}, with the intersection bound and the
/// closed-form intermediate bound as extras.
ProbeResult llt_probe_lattice(const ProcessModel& model, const Schedule& sched, int k,
                              const ProbeOptions& opts = {});

/// mu(S_n = 0) for a model without a schedule, against `bound`.
ProbeResult llt_probe_lattice(const ProcessModel& model, std::int64_t n, double bound,
                              const ProbeOptions& opts = {});

/// Lattice: Kolmogorov distance at n_k against a_{n_k}/2. Density: the lower
/// bound (P - (Phi(rho) - Phi(-rho)))/2 obtained from the small-ball probability
/// P >= mu(G~_k) b_{n_k}, against a_{n_k}.
ProbeResult clt_probe(const ProcessModel& model, const Schedule& sched, int k,
                      const ProbeOptions& opts = {});

/// Kolmogorov distance of the exact law at n against `bound` (AtMost).
ProbeResult clt_probe(const ProcessModel& model, std::int64_t n, double bound,
                      const ProbeOptions& opts = {});

/// Density variant, odd k: (b p_k / (2 d_k)) sigma(f) against L with
/// b = b_{n_k} from interval_probability.
ProbeResult llt_probe_density(const ProcessModel& model, const Schedule& sched, int k,
                              const ProbeOptions& opts = {});

/// Linear filter Y_j = X_j + filter * X_{j-1}; filter = 0 is the process itself.
struct MdsOptions {
  double filter = 0.0;
  /// Largest number of (path, noise cell) combinations enumerated exactly.
  double exact_budget = 2e8;
  bool force_monte_carlo = false;
};

/// Exact: largest |E(Y_k | cylinder)| over trajectory/noise-cell cylinders
/// and over events determined by the other Y_j, against 1e-12. Monte Carlo:
/// largest |bin mean| / se over bins of (sign Y_{k-1}, sign Y_{k+1}), against 4.
ProbeResult mds_conditional_mean_test(const ProcessModel& model, int window, std::size_t reps,
                                      std::uint64_t seed, const MdsOptions& opts = {});

/// min over reachable depth-step tower histories of E(f^2 | history).
/// Depth 0 is the unconditional second moment.
double conditional_variance_floor(const ProcessModel& model, int depth);

/// |variance_of_f - stationary sum| against 1e-12. Thm2 adds the closed-form
/// comparison within the truncation remainder.
ProbeResult variance_probe(const ProcessModel& model, const Schedule* sched = nullptr);

/// Density variant: max of the density of f against L1 + L2, with the
/// integral and symmetry as checks.
ProbeResult density_bound_probe(const ProcessModel& model, const Schedule& sched);

struct MixingProfile {
  std::vector<std::int64_t> lags;
  std::vector<double> beta;
  std::vector<double> alpha_upper;
  bool periodic = false;
};

/// beta(0..horizon) of the tower chain started from its stationary law.
std::vector<double> beta_curve(const TowerSystem& sys, std::int64_t horizon);

/// Same curve by pushing laws through the transition operator one step at a
/// time. Slower; used to cross-check the renewal shortcut.
std::vector<double> beta_curve_by_propagation(const TowerSystem& sys, std::int64_t horizon);

MixingProfile mixing_profile(const TowerSystem& sys, const std::vector<std::int64_t>& lags);

/// Unsplit Thm3 chain: the K scheduled towers plus the remainder.
TowerSystem thm3_chain(const Schedule& sched);

struct MixingSearch {
  std::vector<std::int64_t> lag;     // m_k
  std::vector<double> at_lag;        // beta(m_k)
  std::vector<double> worst;         // max beta over [m_k, horizon]
  std::int64_t horizon = 0;
};

/// m_k = smallest lag with beta <= eps_k. The exact curve is computed on a
/// horizon that doubles until every target is reached; the reported
/// horizon is 2 max m_k.
MixingSearch search_mixing_lags(const TowerSystem& sys, const std::vector<double>& eps,
                                std::int64_t cap = 50'000'000);

/// One probe per k: max_{n in [m_k, horizon]} beta(n) against 7 eps_k.
/// Fills sched.mixing_lag.
std::vector<ProbeResult> mixing_probes(Schedule& sched);

/// sup_N |(sigma sqrt(n)/h) P_n(nb + Nh) - phi((nb + Nh - nm)/(sigma sqrt(n)))|
/// for the i.i.d. n-fold convolution of `step_law`.
double gnedenko_baseline(const LatticeDistribution& step_law, double b, double h, std::int64_t n);

}  // namespace mdsllt
