#include "mdsllt/construction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mdsllt/errors.hpp"

namespace mdsllt {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Thm1: return "thm1";
    case Variant::Thm2: return "thm2";
    case Variant::Thm3: return "thm3";
    case Variant::Iid: return "iid-baseline";
  }
  return "?";
}

Variant variant_from_string(const std::string& s) {
  if (s == "thm1") return Variant::Thm1;
  if (s == "thm2") return Variant::Thm2;
  if (s == "thm3") return Variant::Thm3;
  if (s == "iid-baseline") return Variant::Iid;
  throw std::invalid_argument("unknown variant '" + s + "'");
}

// ---------------------------------------------------------------------------
// Rate sequences

RateSequence::RateSequence(std::string descriptor, std::function<double(std::int64_t)> fn)
    : descriptor_(std::move(descriptor)), fn_(std::move(fn)) {}

namespace {
std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}
}  // namespace

RateSequence RateSequence::power_law(double c, double beta) {
  if (!(c > 0.0) || !(beta > 0.0)) throw std::invalid_argument("power law needs c > 0 and beta > 0");
  return {"power:" + fmt_double(c) + "," + fmt_double(beta),
          [c, beta](std::int64_t n) { return c * std::pow(static_cast<double>(n), -beta); }};
}

RateSequence RateSequence::logarithmic(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("log rate needs c > 0");
  return {"log:" + fmt_double(c), [c](std::int64_t n) {
            return c / std::log(static_cast<double>(n) + std::numbers::e);
          }};
}

RateSequence RateSequence::constant(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("constant rate needs c > 0");
  return {"constant:" + fmt_double(c), [c](std::int64_t) { return c; }};
}

double RateSequence::operator()(std::int64_t n) const {
  if (n < 1) throw std::invalid_argument("rate sequence is indexed from n = 1");
  const double v = fn_(n);
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument("rate sequence must be positive, got a_" + std::to_string(n) +
                                " = " + fmt_double(v));
  return v;
}

std::optional<std::int64_t> RateSequence::first_at_most(double threshold, std::int64_t after,
                                                        std::int64_t cap) const {
  auto monotone = [&](std::int64_t lo_n, double lo_v, std::int64_t hi_n, double hi_v) {
    if (hi_v > lo_v)
      throw ScheduleInfeasible("rate sequence " + descriptor_ + " increases between n = " +
                               std::to_string(lo_n) + " and n = " + std::to_string(hi_n));
  };
  if (after + 1 > cap) return std::nullopt;
  std::int64_t lo = after;  // last index known to exceed the threshold (or the start)
  double lo_v = std::numeric_limits<double>::infinity();
  std::int64_t step = 1;
  std::int64_t hi = -1;
  double hi_v = 0.0;
  for (;;) {
    const std::int64_t n = std::min(after + step, cap);
    const double v = (*this)(n);
    if (lo > after) monotone(lo, lo_v, n, v);
    if (v <= threshold) {
      hi = n;
      hi_v = v;
      break;
    }
    lo = n;
    lo_v = v;
    if (n == cap) return std::nullopt;
    step *= 2;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    const double v = (*this)(mid);
    if (lo > after) monotone(lo, lo_v, mid, v);
    monotone(mid, v, hi, hi_v);
    if (v <= threshold) {
      hi = mid;
      hi_v = v;
    } else {
      lo = mid;
      lo_v = v;
    }
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Schedules

std::int64_t coprime_height(std::int64_t lower_bound, const std::vector<std::int64_t>& heights) {
  std::int64_t h = std::max<std::int64_t>(lower_bound, 1);
  auto ok = [&](std::int64_t c) {
    return std::all_of(heights.begin(), heights.end(),
                       [c](std::int64_t x) { return std::gcd(c, x) == 1; });
  };
  while (!ok(h)) ++h;
  return h;
}

namespace {

std::int64_t gcd_of(const std::vector<std::int64_t>& v) {
  std::int64_t g = 0;
  for (auto x : v) g = std::gcd(g, x);
  return g;
}

// Bumps the last height until the family is aperiodic.
void enforce_gcd_one(std::vector<std::int64_t>& heights) {
  if (heights.empty()) return;
  while (gcd_of(heights) > 1) ++heights.back();
}

void check_decay(const RateSequence& a, Schedule& s) {
  if (s.n.empty()) return;
  const std::int64_t last = s.n.back();
  if (last <= std::numeric_limits<std::int64_t>::max() / 4 && !(a(4 * last) < a(last)))
    s.warnings.push_back("a_{4n} >= a_n at n = " + std::to_string(last) +
                         "; the rate may not decrease to zero");
}

void require_k(int K, int min_k) {
  if (K < min_k)
    throw std::invalid_argument("schedule needs K >= " + std::to_string(min_k) + ", got " +
                                std::to_string(K));
}

}  // namespace

Schedule derive_schedule_thm1(const RateSequence& a, int K, const ScheduleOptions& opts) {
  require_k(K, 1);
  Schedule s;
  s.variant = Variant::Thm1;
  s.rate = a.descriptor();
  std::int64_t prev = 0;
  double sum_a = 0.0, sum_d = 0.0;
  for (int k = 0; k < K; ++k) {
    // a_{n_k} <= 2^{-(k+3)} keeps Sum a_{n_k} <= 1/4 for the whole sequence.
    const double budget = std::ldexp(1.0, -(k + 3));
    const auto nk = a.first_at_most(budget, prev, opts.search_cap);
    if (!nk)
      throw ScheduleInfeasible("thm1: no n <= " + std::to_string(opts.search_cap) +
                               " with a_n <= " + fmt_double(budget) + " for k = " +
                               std::to_string(k));
    const std::int64_t n = *nk;
    const double an = a(n);
    const double rho = std::ldexp(1.0, -(k + 1));
    const double d = 2.0 * an;
    // n^2 * (level mass) <= rho * d with level mass d / (H - n + 1).
    const auto slab = static_cast<std::int64_t>(
        std::ceil(static_cast<double>(n) * static_cast<double>(n) / rho));
    const std::int64_t H = slab + n - 1;
    const double mass = d * static_cast<double>(H) / static_cast<double>(H - n + 1);
    s.n.push_back(n);
    s.a_n.push_back(an);
    s.d.push_back(d);
    s.rho.push_back(rho);
    s.eps.push_back(rho / static_cast<double>(n));
    s.height.push_back(H);
    s.p.push_back(mass);
    sum_a += an;
    sum_d += d;
    prev = n;
  }
  if (!(sum_a < 0.5) || !(sum_d < 1.0))
    throw ScheduleInfeasible("thm1: sum constraints violated");
  double used = 0.0;
  for (double m : s.p) used += m;
  if (!(used < 1.0)) throw ScheduleInfeasible("thm1: tower masses exceed 1");
  s.remainder_mass = 1.0 - used;
  s.remainder_height = coprime_height(s.n.back(), s.height);
  s.remainder_weight = 1.0;
  check_decay(a, s);
  return s;
}

Schedule derive_schedule_thm2(const RateSequence& a, double L1, double L2, double L, int K,
                              const ScheduleOptions& opts) {
  require_k(K, 2);
  if (!(L1 > 0.0) || !(L2 > 0.0) || !(L > 0.0))
    throw BadConstants("L1, L2 and L must be positive");
  if (L2 < 10.0 * L1) throw BadConstants("need L2 >= 10 L1, got L1 = " + fmt_double(L1) +
                                         ", L2 = " + fmt_double(L2));
  Schedule s;
  s.variant = Variant::Thm2;
  s.rate = a.descriptor();
  s.L1 = L1;
  s.L2 = L2;
  s.L = L;
  const double p0 = (std::numbers::sqrt2 - 1.0) / std::numbers::sqrt2;
  double used = 0.0, sum_pd2 = 0.0;
  for (int k = 0; k < K; ++k) {
    const double pk = p0 * std::pow(2.0, -k / 2.0);
    const double dk = pk / (k % 2 == 0 ? L1 : L2);
    s.p.push_back(pk);
    s.d.push_back(dk);
    used += pk;
    sum_pd2 += pk * dk * dk;
    (k % 2 == 0 ? s.c1 : s.c2) += pk * pk * pk;
  }
  s.remainder_mass = 1.0 - used;
  // The remainder sits on |x| in [w/2, w] with w >= 2 d_1, where only the
  // even family contributes (density L1), and r / w <= L2 keeps the total
  // under L1 + L2.
  s.remainder_weight = std::max(2.0 * s.d[1], s.remainder_mass / L2);
  s.sigma2 = 7.0 / 12.0 *
             (sum_pd2 + s.remainder_mass * s.remainder_weight * s.remainder_weight);
  // Sum over one parity class: p_{k+2}^3 = p_k^3 / 8.
  const double cube_ratio = 1.0 / (1.0 - std::pow(2.0, -3.0));
  s.c1_full = p0 * p0 * p0 * cube_ratio;
  const double p1 = p0 / std::numbers::sqrt2;
  s.c2_full = p1 * p1 * p1 * cube_ratio;
  s.sigma2_closed_form = 7.0 / 12.0 * (s.c1_full / (L1 * L1) + s.c2_full / (L2 * L2));
  // sigma2 - closed form = remainder tower term - dropped tail, both >= 0.
  const int first_even = K % 2 == 0 ? K : K + 1, first_odd = K % 2 == 1 ? K : K + 1;
  const double tail_ratio = 1.0 / (1.0 - std::pow(2.0, -3.0));
  const double tail = 7.0 / 12.0 * p0 * p0 * p0 * tail_ratio *
                      (std::pow(2.0, -1.5 * first_even) / (L1 * L1) +
                       std::pow(2.0, -1.5 * first_odd) / (L2 * L2));
  const double rem_term =
      7.0 / 12.0 * s.remainder_mass * s.remainder_weight * s.remainder_weight;
  s.truncation_remainder = std::max(tail, rem_term);
  const double sigma = std::sqrt(s.sigma2);

  std::int64_t prev = 0, prev_h = 0;
  for (int k = 0; k < K; ++k) {
    const double rho = s.d[k] / sigma;
    const auto nk = a.first_at_most(rho, prev, opts.search_cap);
    if (!nk)
      throw ScheduleInfeasible("thm2: no n <= " + std::to_string(opts.search_cap) +
                               " with a_n <= rho_" + std::to_string(k) + " = " + fmt_double(rho));
    s.n.push_back(*nk);
    s.a_n.push_back(a(*nk));
    s.rho.push_back(rho);
    prev_h = std::max(2 * *nk, prev_h + 1);
    s.height.push_back(prev_h);
    prev = *nk;
  }
  enforce_gcd_one(s.height);
  s.remainder_height = coprime_height(s.n.back(), s.height);
  check_decay(a, s);
  return s;
}

Schedule derive_schedule_thm3(const RateSequence& a, int K, const ScheduleOptions& opts) {
  require_k(K, 2);
  if (!(opts.tail_reserve > 0.0 && opts.tail_reserve < 1.0))
    throw std::invalid_argument("tail reserve must lie in (0, 1)");
  Schedule s;
  s.variant = Variant::Thm3;
  s.rate = a.descriptor();
  const double budget = 1.0 - opts.tail_reserve;
  const std::int64_t max_base = opts.search_cap >> (K - 1);
  // n_k = n_0 2^k with n_0 the smallest base whose minimal masses 4 a_{n_k} fit.
  auto total = [&](std::int64_t base) {
    double t = 0.0, prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      const double v = a(base << k);
      if (v > prev) throw ScheduleInfeasible("rate sequence " + a.descriptor() + " increases");
      prev = v;
      t += 4.0 * v;
    }
    return t;
  };
  std::int64_t lo = 0, hi = -1;
  for (std::int64_t step = 1;; step *= 2) {
    const std::int64_t b = std::min(step, max_base);
    if (b < 1) break;
    if (total(b) <= budget) {
      hi = b;
      break;
    }
    lo = b;
    if (b == max_base) break;
  }
  if (hi < 0)
    throw ScheduleInfeasible("thm3: Sum 4 a_{n_k} never drops to " + fmt_double(budget) +
                             " for n_k <= " + std::to_string(opts.search_cap));
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (total(mid) <= budget ? hi : lo) = mid;
  }
  double remaining = 1.0;
  std::int64_t prev_h = 0;
  for (int k = 0; k < K; ++k) {
    const std::int64_t n = hi << k;
    const double an = a(n);
    const double pk = 4.0 * an;
    s.n.push_back(n);
    s.a_n.push_back(an);
    s.p.push_back(pk);
    s.delta.push_back(1.0 - pk / remaining);
    remaining -= pk;
    s.eps.push_back(std::ldexp(opts.eps0, -k));
    prev_h = std::max(4 * n * n, prev_h + 1);
    s.height.push_back(prev_h);
  }
  enforce_gcd_one(s.height);
  s.remainder_mass = remaining;
  s.remainder_height = coprime_height(s.n.back(), s.height);
  s.remainder_weight = 1.0;
  check_decay(a, s);
  return s;
}

// ---------------------------------------------------------------------------
// Noise

NoiseSpec NoiseSpec::lattice(double a) {
  if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("lattice noise needs 0 < a <= 1");
  return {Kind::Lattice, a};
}

NoiseSpec NoiseSpec::two_interval() { return {Kind::TwoIntervalUniform, 1.0}; }

double NoiseSpec::variance() const { return kind == Kind::Lattice ? a : 7.0 / 12.0; }

bool NoiseSpec::in_support(double g) const {
  if (kind == Kind::Lattice) return g == 1.0 || g == -1.0 || (g == 0.0 && a < 1.0);
  const double m = std::abs(g);
  return m >= 0.5 && m <= 1.0;
}

double NoiseSpec::draw(double u) const {
  if (kind == Kind::Lattice) {
    if (u < a / 2.0) return -1.0;
    if (u < a) return 1.0;
    return 0.0;
  }
  return u < 0.5 ? u - 1.0 : u;
}

std::vector<NoiseSpec::Cell> NoiseSpec::cells() const {
  if (kind == Kind::TwoIntervalUniform) return {{0.5, -0.75, -0.75}, {0.5, 0.75, 0.75}};
  std::vector<Cell> out{{a / 2.0, -1.0, -1.0}};
  if (a < 1.0) out.push_back({1.0 - a, 0.0, 0.0});
  out.push_back({a / 2.0, 1.0, 1.0});
  return out;
}

// ---------------------------------------------------------------------------
// Models

namespace {

constexpr double kMaxModelStates = 5e7;

struct TowerPlan {
  TowerSpec spec;
  // weight on levels [0, low_levels) and on the rest of the tower
  std::int64_t low_levels = 0;
  double low_weight = 0.0;
  double weight = 1.0;
};

ProcessModel assemble(Variant variant, const std::vector<TowerPlan>& plan, const NoiseSpec& noise) {
  double states = 0.0;
  for (const auto& t : plan) states += static_cast<double>(t.spec.height);
  if (states > kMaxModelStates)
    throw BudgetExceeded("model would have " + fmt_double(states) + " states");
  std::vector<TowerSpec> specs;
  for (const auto& t : plan) specs.push_back(t.spec);
  ProcessModel m;
  m.variant = variant;
  m.system = TowerSystem::build(std::move(specs));
  m.noise = noise;
  m.weight.assign(m.system.state_count(), 0.0);
  for (std::size_t l = 0; l < plan.size(); ++l) {
    const auto begin = m.system.tower_begin(l);
    for (std::int64_t j = 0; j < plan[l].spec.height; ++j)
      m.weight[begin + static_cast<std::size_t>(j)] =
          j < plan[l].low_levels ? plan[l].low_weight : plan[l].weight;
  }
  const auto pi = stationary_measure(m.system);
  for (std::size_t i = 0; i < pi.size(); ++i)
    if (m.weight[i] == 0.0) m.mu_A += pi[i];
  m.sigma2 = stationary_variance(m);
  return m;
}

}  // namespace

ProcessModel build_counterexample(const Schedule& sched, const NoiseSpec& noise) {
  const bool lattice = noise.kind == NoiseSpec::Kind::Lattice;
  if ((sched.variant == Variant::Thm2) == lattice || sched.variant == Variant::Iid)
    throw VariantMismatch("noise kind does not match schedule variant " + to_string(sched.variant));
  const std::size_t K = sched.size();
  std::vector<TowerPlan> plan;
  ProcessModel m;
  std::vector<std::size_t> block_tower;

  switch (sched.variant) {
    case Variant::Thm1:
      // A_k: lowest H_k - n_k + 1 levels of tower k, tower mass scaled so mu(A_k) = d_k.
      for (std::size_t k = 0; k < K; ++k) {
        const std::int64_t H = sched.height[k], n = sched.n[k];
        block_tower.push_back(plan.size());
        plan.push_back({{H, sched.p[k]}, H - n + 1, 0.0, 1.0});
      }
      break;
    case Variant::Thm3:
      // Tower k is split into the F-bar half (carrying A_k) and the other half.
      for (std::size_t k = 0; k < K; ++k) {
        const std::int64_t H = sched.height[k], n = sched.n[k];
        block_tower.push_back(plan.size());
        plan.push_back({{H, sched.p[k] / 2.0}, H - n + 1, 0.0, 1.0});
        plan.push_back({{H, sched.p[k] / 2.0}, 0, 1.0, 1.0});
      }
      break;
    case Variant::Thm2:
      for (std::size_t k = 0; k < K; ++k) {
        block_tower.push_back(plan.size());
        plan.push_back({{sched.height[k], sched.p[k]}, 0, sched.d[k], sched.d[k]});
      }
      break;
    case Variant::Iid:
      break;
  }
  if (sched.remainder_mass > 0.0)
    plan.push_back({{sched.remainder_height, sched.remainder_mass}, 0, 1.0, sched.remainder_weight});
  m = assemble(sched.variant, plan, noise);
  m.block_tower = block_tower;

  for (std::size_t k = 0; k < K; ++k) {
    const auto l = block_tower[k];
    const auto& t = m.system.towers()[l];
    const double level = m.system.level_measure(l);
    if (sched.variant == Variant::Thm2) {
      m.block_measure.push_back(t.mass);
      continue;
    }
    const std::int64_t H = t.height, n = sched.n[k];
    m.block_measure.push_back(static_cast<double>(H - n + 1) * level);
    // Points of A_k staying in A_k for n steps: levels 0 .. H - 2n + 1.
    m.intersection.push_back(static_cast<double>(std::max<std::int64_t>(0, H - 2 * n + 2)) * level);
  }
  if (lattice && !(m.mu_A > 0.0 && m.mu_A < 1.0))
    throw DegenerateModel("mu(A) = " + fmt_double(m.mu_A) + " is not in (0, 1)");
  return m;
}

ProcessModel make_iid_model(const NoiseSpec& noise) {
  return assemble(Variant::Iid, {{{1, 1.0}, 0, 1.0, 1.0}}, noise);
}

double evaluate_f(const ProcessModel& model, TowerState s, double g) {
  const auto idx = model.system.index(s);
  if (!model.noise.in_support(g))
    throw std::invalid_argument("g = " + fmt_double(g) + " is outside the noise support");
  return model.weight[idx] * g;
}

double variance_of_f(const ProcessModel& model) {
  if (model.noise.kind == NoiseSpec::Kind::Lattice) return model.noise.a * (1.0 - model.mu_A);
  double s = 0.0;
  const auto& sys = model.system;
  for (std::size_t l = 0; l < sys.tower_count(); ++l) {
    // weight is constant on every tower of the density variant
    const double w = model.weight[sys.tower_begin(l)];
    s += sys.towers()[l].mass * w * w;
  }
  return 7.0 / 12.0 * s;
}

double stationary_variance(const ProcessModel& model) {
  const auto pi = stationary_measure(model.system);
  double s = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) s += pi[i] * model.weight[i] * model.weight[i];
  return s * model.noise.variance();
}

PiecewiseDensity density_of_f(const ProcessModel& model) {
  if (model.noise.kind == NoiseSpec::Kind::Lattice)
    throw VariantMismatch("lattice models have no density");
  // weight -> total mass carrying that weight
  std::map<double, double> by_weight;
  const auto pi = stationary_measure(model.system);
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (model.weight[i] == 0.0) throw DegenerateModel("f has an atom at 0");
    by_weight[model.weight[i]] += pi[i];
  }
  std::vector<double> cuts;
  for (const auto& [w, mass] : by_weight) {
    for (double x : {-w, -w / 2.0, w / 2.0, w}) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  PiecewiseDensity out;
  out.breakpoints = cuts;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = std::abs(0.5 * (cuts[i] + cuts[i + 1]));
    double v = 0.0;
    for (const auto& [w, mass] : by_weight)
      if (mid >= w / 2.0 && mid <= w) v += mass / w;
    out.values.push_back(v);
  }
  return out;
}

}  // namespace mdsllt
