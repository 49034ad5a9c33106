#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mdsllt/density.hpp"
#include "mdsllt/tower.hpp"

namespace mdsllt {

enum class Variant { Thm1, Thm2, Thm3, Iid };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

/// Target rate a_n: positive, non-increasing, tending to zero.
class RateSequence {
 public:
  RateSequence(std::string descriptor, std::function<double(std::int64_t)> fn);

  /// c * n^(-beta)
  static RateSequence power_law(double c, double beta);
  /// c / log(n + e)
  static RateSequence logarithmic(double c);
  static RateSequence constant(double c);

  /// a_n for n >= 1. Throws std::invalid_argument if a_n <= 0.
  double operator()(std::int64_t n) const;
  const std::string& descriptor() const { return descriptor_; }

  /// Smallest n in (after, cap] with a_n <= threshold, found by galloping
  /// then bisection. Throws ScheduleInfeasible if a probed value increases.
  std::optional<std::int64_t> first_at_most(double threshold, std::int64_t after,
                                            std::int64_t cap) const;

 private:
  std::string descriptor_;
  std::function<double(std::int64_t)> fn_;
};

/// Per-index construction parameters. Arrays are indexed by k = 0..K-1.
struct Schedule {
  Variant variant = Variant::Thm1;
  std::string rate;
  std::vector<std::int64_t> n;       // probe times n_k
  std::vector<double> a_n;           // a_{n_k}
  std::vector<std::int64_t> height;  // realised tower heights H_k
  std::vector<double> d;             // set masses (Thm1) or weights (Thm2)
  std::vector<double> p;             // tower masses
  std::vector<double> rho;
  std::vector<double> eps;
  std::vector<double> delta;               // Thm3 only
  std::vector<std::int64_t> mixing_lag;    // m_k, filled by mixing verification

  std::int64_t remainder_height = 1;
  double remainder_mass = 0.0;
  double remainder_weight = 1.0;  // weight of f on the remainder tower

  // Density variant constants.
  double L1 = 0.0, L2 = 0.0, L = 0.0;
  double c1 = 0.0, c2 = 0.0;            // truncated at K
  double c1_full = 0.0, c2_full = 0.0;  // whole geometric family
  double sigma2 = 0.0;                  // variance of f in the truncated model
  double sigma2_closed_form = 0.0;      // (7/12)(c1/L1^2 + c2/L2^2), full family
  double truncation_remainder = 0.0;    // bound on |sigma2 - sigma2_closed_form|

  std::vector<std::string> warnings;

  std::size_t size() const { return n.size(); }
};

struct ScheduleOptions {
  std::int64_t search_cap = 10'000'000;
  /// Thm3: mass kept for the remainder tower, Sum p_k <= 1 - tail_reserve.
  double tail_reserve = 0.2;
  /// Thm3: eps_k = eps0 * 2^-k.
  double eps0 = 0.1;
};

Schedule derive_schedule_thm1(const RateSequence& a, int K, const ScheduleOptions& opts = {});
Schedule derive_schedule_thm2(const RateSequence& a, double L1, double L2, double L, int K,
                              const ScheduleOptions& opts = {});
Schedule derive_schedule_thm3(const RateSequence& a, int K, const ScheduleOptions& opts = {});

/// Smallest h >= lower_bound coprime to every entry of `heights`.
std::int64_t coprime_height(std::int64_t lower_bound, const std::vector<std::int64_t>& heights);

struct NoiseSpec {
  enum class Kind { Lattice, TwoIntervalUniform };
  Kind kind = Kind::Lattice;
  double a = 1.0;  // Lattice: P(g = +-1) = a/2

  static NoiseSpec lattice(double a);
  static NoiseSpec two_interval();

  double mean() const { return 0.0; }
  double variance() const;
  bool in_support(double g) const;
  /// Draw from a uniform variate on [0, 1).
  double draw(double u) const;

  /// Partition of the noise range used for exact conditioning: each cell
  /// has a probability, a conditional mean and a representative value.
  struct Cell {
    double prob;
    double mean;
    double representative;
  };
  std::vector<Cell> cells() const;
};

/// f(state, g) = weight(state) * g with g independent of the tower factor.
struct ProcessModel {
  Variant variant = Variant::Thm1;
  TowerSystem system;
  NoiseSpec noise;
  std::vector<double> weight;  // by flat state
  double sigma2 = 0.0;

  // Lattice variants: A is the set where weight == 0.
  double mu_A = 0.0;
  std::vector<std::size_t> block_tower;  // tower carrying block k (A_k or G_k)
  std::vector<double> block_measure;     // mu(A_k) or mu(G_k)
  std::vector<double> intersection;      // mu(cap_{i<n_k} T^-i A_k), lattice only
};

ProcessModel build_counterexample(const Schedule& sched, const NoiseSpec& noise);

/// Single-state system with weight 1: f = g, an i.i.d. sequence.
ProcessModel make_iid_model(const NoiseSpec& noise);

double evaluate_f(const ProcessModel& model, TowerState s, double g);

/// Closed form: a (1 - mu(A)) for lattice models, (7/12) Sum mass * weight^2
/// for the density variant.
double variance_of_f(const ProcessModel& model);

/// Sum over states of stationary(s) * weight(s)^2 * Var(g).
double stationary_variance(const ProcessModel& model);

PiecewiseDensity density_of_f(const ProcessModel& model);

}  // namespace mdsllt
