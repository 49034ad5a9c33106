#include "mdsllt/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include "mdsllt/errors.hpp"

namespace mdsllt {

std::string to_string(Direction d) { return d == Direction::AtLeast ? ">=" : "<="; }

std::string to_string(Method m) {
  switch (m) {
    case Method::Exact: return "exact";
    case Method::Grid: return "grid";
    case Method::MonteCarlo: return "monte-carlo";
  }
  return "?";
}

double ProbeResult::extra(const std::string& key) const {
  for (const auto& [k, v] : extras)
    if (k == key) return v;
  throw std::out_of_range("probe " + name + " has no field " + key);
}

bool ProbeResult::has_extra(const std::string& key) const {
  return std::any_of(extras.begin(), extras.end(), [&](const auto& e) { return e.first == key; });
}

void ProbeResult::decide() {
  const double margin = direction == Direction::AtLeast ? value - bound : bound - value;
  pass = margin >= error - tolerance;
  for (const auto& [name_, ok] : checks) pass = pass && ok;
}

namespace bounds {
double llt(const Schedule& s, int k) { return s.a_n.at(static_cast<std::size_t>(k)); }
double clt_lattice(const Schedule& s, int k) { return s.a_n.at(static_cast<std::size_t>(k)) / 2.0; }
double thm1_intermediate(const Schedule& s, int k) {
  const auto i = static_cast<std::size_t>(k);
  return s.d.at(i) * (1.0 - s.rho.at(i));
}
double thm3_intermediate(const Schedule& s, int k) { return s.p.at(static_cast<std::size_t>(k)) / 4.0; }
double mixing(const Schedule& s, int k) { return 7.0 * s.eps.at(static_cast<std::size_t>(k)); }
double density(const Schedule& s) { return s.L1 + s.L2; }
double ratio(const Schedule& s) { return s.L; }
}  // namespace bounds

namespace {

void check_index(const Schedule& sched, int k) {
  if (k < 0 || static_cast<std::size_t>(k) >= sched.size())
    throw std::invalid_argument("index k = " + std::to_string(k) + " outside the schedule");
}

void require_lattice(const ProcessModel& model) {
  if (model.noise.kind != NoiseSpec::Kind::Lattice) throw VariantMismatch("probe needs a lattice model");
}

void require_density(const ProcessModel& model, const Schedule& sched) {
  if (model.variant != Variant::Thm2 || sched.variant != Variant::Thm2)
    throw VariantMismatch("probe needs the density variant");
}

// Exact law of S_n when the occupancy computation fits, otherwise nothing.
std::optional<LatticeDistribution> exact_law(const ProcessModel& model, std::int64_t n,
                                             const ProbeOptions& opts) {
  try {
    return lattice_sum_distribution(model, n, opts.occupancy);
  } catch (const WindowTooLarge&) {
    return std::nullopt;
  }
}

// Two-sided Dvoretzky-Kiefer-Wolfowitz radius at confidence 1 - 1e-6.
double dkw_radius(std::size_t reps) {
  return std::sqrt(std::log(2.0 / 1e-6) / (2.0 * static_cast<double>(reps)));
}

double empirical_kolmogorov(std::vector<double> samples, double scale) {
  std::sort(samples.begin(), samples.end());
  const auto N = static_cast<double>(samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size();) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    const double phi = normal_cdf(samples[i] / scale);
    worst = std::max({worst, std::abs(static_cast<double>(i) / N - phi),
                      std::abs(static_cast<double>(j) / N - phi)});
    i = j;
  }
  return worst;
}

void fill_zero_mass(ProbeResult& r, const ProcessModel& model, std::int64_t n,
                    const ProbeOptions& opts) {
  if (const auto law = exact_law(model, n, opts)) {
    r.value = law->at(0);
    r.method = Method::Exact;
    r.error = kExactMargin;
    return;
  }
  const auto s = sample_partial_sums(model, n, opts.mc_reps, opts.seed, opts.workers);
  const auto zeros = std::count_if(s.begin(), s.end(), [](double x) { return std::abs(x) < 0.5; });
  r.value = static_cast<double>(zeros) / static_cast<double>(s.size());
  const double se = std::sqrt(r.value * (1.0 - r.value) / static_cast<double>(s.size()));
  r.method = Method::MonteCarlo;
  r.error = 4.0 * se;
  r.extras.push_back({"standard_error", se});
}

void fill_kolmogorov(ProbeResult& r, const ProcessModel& model, std::int64_t n,
                     const ProbeOptions& opts) {
  const double sigma = std::sqrt(model.sigma2);
  if (!(sigma > 0.0)) throw DegenerateModel("f has zero variance");
  if (const auto law = exact_law(model, n, opts)) {
    r.value = kolmogorov_distance(*law, sigma, n);
    r.method = Method::Exact;
    r.error = kExactMargin;
    return;
  }
  const auto s = sample_partial_sums(model, n, opts.mc_reps, opts.seed, opts.workers);
  r.value = empirical_kolmogorov(s, sigma * std::sqrt(static_cast<double>(n)));
  r.method = Method::MonteCarlo;
  r.error = dkw_radius(s.size());
}

struct SmallBall {
  IntervalProbability b;
  double mu_tilde = 0.0;  // measure of the levels whose n-step orbit stays in G_k
  double lower = 0.0;     // mu_tilde * b
  double lower_error = 0.0;
};

SmallBall small_ball(const ProcessModel& model, const Schedule& sched, int k,
                     const ProbeOptions& opts) {
  const auto i = static_cast<std::size_t>(k);
  const std::int64_t n = sched.n[i];
  const auto l = model.block_tower.at(i);
  const std::int64_t H = model.system.towers()[l].height;
  SmallBall out;
  IntervalOptions io = opts.interval;
  io.seed = opts.seed;
  io.workers = opts.workers;
  out.b = interval_probability(std::vector<double>(static_cast<std::size_t>(n), 1.0),
                               std::sqrt(static_cast<double>(n)), io);
  out.mu_tilde = static_cast<double>(std::max<std::int64_t>(0, H - n + 1)) *
                 model.system.level_measure(l);
  out.lower = out.mu_tilde * out.b.value;
  const double berr = out.b.method == IntervalProbability::Method::MonteCarlo ? 4.0 * out.b.error
                                                                                 : out.b.error;
  out.lower_error = out.mu_tilde * berr;
  return out;
}

Method method_of(const IntervalProbability& b) {
  return b.method == IntervalProbability::Method::MonteCarlo ? Method::MonteCarlo : Method::Grid;
}

}  // namespace

ProbeResult llt_probe_lattice(const ProcessModel& model, const Schedule& sched, int k,
                              const ProbeOptions& opts) {
  require_lattice(model);
  if (model.variant != sched.variant || (sched.variant != Variant::Thm1 && sched.variant != Variant::Thm3))
    throw VariantMismatch("llt probe needs a thm1 or thm3 model with its schedule");
  check_index(sched, k);
  const auto i = static_cast<std::size_t>(k);
  ProbeResult r;
  r.name = "llt";
  r.k = k;
  r.n = sched.n[i];
  r.bound = bounds::llt(sched, k);
  r.direction = Direction::AtLeast;
  fill_zero_mass(r, model, r.n, opts);
  const double inter = model.intersection.at(i);
  r.extras.push_back({"intersection", inter});
  r.extras.push_back({"block_measure", model.block_measure.at(i)});
  if (sched.variant == Variant::Thm1) {
    const double mid = bounds::thm1_intermediate(sched, k);
    r.extras.push_back({"intermediate_bound", mid});
    r.checks.push_back({"intersection>=intermediate", inter >= mid});
    r.checks.push_back({"intermediate>=a_n", mid >= r.bound});
  } else {
    const double mid = bounds::thm3_intermediate(sched, k);
    const double n = static_cast<double>(r.n), N = static_cast<double>(sched.height[i]);
    const double half = sched.p[i] / 2.0 - n * n * sched.p[i] / N;
    r.extras.push_back({"half_minus_defect", half});
    r.extras.push_back({"intermediate_bound", mid});
    r.checks.push_back({"intersection>=half_minus_defect", inter >= half});
    r.checks.push_back({"half_minus_defect>=intermediate", half >= mid});
    r.checks.push_back({"intermediate>=a_n", mid >= r.bound});
  }
  if (r.method == Method::Exact) r.checks.push_back({"value>=intersection", r.value >= inter - 1e-12});
  r.decide();
  return r;
}

ProbeResult llt_probe_lattice(const ProcessModel& model, std::int64_t n, double bound,
                              const ProbeOptions& opts) {
  require_lattice(model);
  ProbeResult r;
  r.name = "llt";
  r.n = n;
  r.bound = bound;
  r.direction = Direction::AtLeast;
  fill_zero_mass(r, model, n, opts);
  r.decide();
  return r;
}

ProbeResult clt_probe(const ProcessModel& model, const Schedule& sched, int k,
                      const ProbeOptions& opts) {
  check_index(sched, k);
  const auto i = static_cast<std::size_t>(k);
  ProbeResult r;
  r.name = "clt";
  r.k = k;
  r.n = sched.n[i];
  r.direction = Direction::AtLeast;
  if (sched.variant != Variant::Thm2) {
    require_lattice(model);
    if (model.variant != sched.variant) throw VariantMismatch("model and schedule differ");
    r.bound = bounds::clt_lattice(sched, k);
    fill_kolmogorov(r, model, r.n, opts);
    r.decide();
    return r;
  }
  require_density(model, sched);
  if (k % 2 == 0) throw EvenIndex("the density CLT bound is proved for odd k only");
  const SmallBall sb = small_ball(model, sched, k, opts);
  const double rho = sched.rho[i];
  const double normal_mass = normal_cdf(rho) - normal_cdf(-rho);
  r.bound = bounds::llt(sched, k);
  r.value = (sb.lower - normal_mass) / 2.0;
  r.method = method_of(sb.b);
  r.error = sb.lower_error / 2.0;
  r.extras = {{"rho", rho},
              {"b", sb.b.value},
              {"small_ball_lower", sb.lower},
              {"normal_mass", normal_mass},
              {"ratio_lower", sb.lower / rho},
              {"lower_bound_form", (sb.lower / rho / 2.0 - normal_pdf(0.0)) * rho}};
  r.checks.push_back({"rho>=a_n", rho >= r.bound});
  r.decide();
  return r;
}

ProbeResult clt_probe(const ProcessModel& model, std::int64_t n, double bound,
                      const ProbeOptions& opts) {
  require_lattice(model);
  ProbeResult r;
  r.name = "clt";
  r.n = n;
  r.bound = bound;
  r.direction = Direction::AtMost;
  fill_kolmogorov(r, model, n, opts);
  r.decide();
  return r;
}

ProbeResult llt_probe_density(const ProcessModel& model, const Schedule& sched, int k,
                              const ProbeOptions& opts) {
  require_density(model, sched);
  check_index(sched, k);
  if (k % 2 == 0) throw EvenIndex("the density LLT bound is proved for odd k only");
  const auto i = static_cast<std::size_t>(k);
  const SmallBall sb = small_ball(model, sched, k, opts);
  const double sigma = std::sqrt(model.sigma2);
  const double scale = sched.p[i] / (2.0 * sched.d[i]) * sigma;
  ProbeResult r;
  r.name = "llt_density";
  r.k = k;
  r.n = sched.n[i];
  r.bound = bounds::ratio(sched);
  r.direction = Direction::AtLeast;
  r.method = method_of(sb.b);
  r.value = sb.b.value * scale;
  r.error = (sb.lower_error / sb.mu_tilde) * scale;
  r.extras = {{"b", sb.b.value},
              {"b_error", sb.b.error},
              {"grid_step", sb.b.step},
              {"mu_tilde", sb.mu_tilde},
              {"ratio_lower", sb.lower / sched.rho[i]},
              {"llt_reference", 2.0 * normal_pdf(0.0)}};
  r.checks.push_back({"b_error<=1e-6", r.method != Method::Grid || sb.b.error <= 1e-6});
  r.checks.push_back({"mu_tilde>=p/2", sb.mu_tilde >= sched.p[i] / 2.0});
  if (opts.mc_reps > 0) {
    const auto mc = interval_probability_monte_carlo(
        std::vector<double>(static_cast<std::size_t>(r.n), 1.0), std::sqrt(static_cast<double>(r.n)),
        opts.mc_reps, opts.seed, opts.workers);
    r.extras.push_back({"b_monte_carlo", mc.value});
    r.extras.push_back({"b_monte_carlo_se", mc.error});
    r.checks.push_back(
        {"b_monte_carlo_agrees", std::abs(mc.value - sb.b.value) <= 4.0 * mc.error + sb.b.error});

    const auto s = sample_partial_sums(model, r.n, opts.mc_reps, opts.seed + 1, opts.workers);
    const double radius = sched.d[i] * std::sqrt(static_cast<double>(r.n));
    const auto inside =
        std::count_if(s.begin(), s.end(), [radius](double x) { return std::abs(x) <= radius; });
    const double est = static_cast<double>(inside) / static_cast<double>(s.size());
    const double se = std::sqrt(est * (1.0 - est) / static_cast<double>(s.size()));
    r.extras.push_back({"small_ball_monte_carlo", est});
    r.extras.push_back({"small_ball_monte_carlo_se", se});
    r.extras.push_back({"small_ball_lower", sb.lower});
    r.checks.push_back({"small_ball_above_lower", est >= sb.lower - sb.lower_error - 4.0 * se});
  }
  r.decide();
  return r;
}

// ---------------------------------------------------------------------------
// Martingale difference test

namespace {

struct BudgetHit {};

// Stationary probability of every weight sequence seen along `length`
// consecutive states.
std::map<std::vector<double>, double> weight_paths(const ProcessModel& model, int length,
                                                   double budget) {
  const auto& sys = model.system;
  const auto pi = stationary_measure(sys);
  const std::size_t S = sys.state_count();
  std::vector<std::size_t> tower_of(S);
  for (std::size_t l = 0; l < sys.tower_count(); ++l)
    for (std::int64_t j = 0; j < sys.towers()[l].height; ++j)
      tower_of[sys.tower_begin(l) + static_cast<std::size_t>(j)] = l;

  std::map<std::vector<double>, double> out;
  std::vector<double> ws(static_cast<std::size_t>(length));
  double visited = 0.0;
  auto dfs = [&](auto&& self, std::size_t s, int depth, double prob) -> void {
    if (++visited > budget) throw BudgetHit{};
    ws[static_cast<std::size_t>(depth)] = model.weight[s];
    if (depth + 1 == length) {
      out[ws] += prob;
      return;
    }
    const std::size_t l = tower_of[s];
    if (s + 1 < sys.tower_begin(l) + static_cast<std::size_t>(sys.towers()[l].height)) {
      self(self, s + 1, depth + 1, prob);
      return;
    }
    const auto& row = sys.top_row(l);
    for (std::size_t d = 0; d < row.size(); ++d)
      if (row[d] > 0.0) self(self, sys.tower_begin(d), depth + 1, prob * row[d]);
  };
  for (std::size_t s = 0; s < S; ++s)
    if (pi[s] > 0.0) dfs(dfs, s, 0, pi[s]);
  return out;
}

ProbeResult mds_exact(const ProcessModel& model, int window, const MdsOptions& opts) {
  const int off = opts.filter != 0.0 ? 1 : 0;
  const int W = window + off;
  const auto paths = weight_paths(model, W, opts.exact_budget);
  const auto cells = model.noise.cells();
  const std::size_t C = cells.size();
  std::size_t combos = 1;
  for (int i = 0; i < W; ++i) combos *= C;

  double worst_fine = 0.0, worst_coarse = 0.0;
  std::vector<std::size_t> idx(static_cast<std::size_t>(W));
  std::vector<double> y(static_cast<std::size_t>(window));
  for (int k = 0; k < window; ++k) {
    const auto target = static_cast<std::size_t>(k + off);
    std::map<std::vector<double>, std::pair<double, double>> coarse;  // key -> (num, den)
    std::vector<double> key(static_cast<std::size_t>(window - 1));
    for (const auto& [ws, pw] : paths) {
      // Fine cylinders: path and every noise cell except the target one.
      std::map<std::vector<std::size_t>, std::pair<double, double>> fine;
      for (std::size_t code = 0; code < combos; ++code) {
        std::size_t c = code;
        double prob = pw;
        for (int i = 0; i < W; ++i) {
          idx[static_cast<std::size_t>(i)] = c % C;
          c /= C;
          prob *= cells[idx[static_cast<std::size_t>(i)]].prob;
        }
        auto x = [&](int i) {
          return ws[static_cast<std::size_t>(i)] * cells[idx[static_cast<std::size_t>(i)]].mean;
        };
        for (int j = 0; j < window; ++j)
          y[static_cast<std::size_t>(j)] = x(j + off) + (off ? opts.filter * x(j) : 0.0);
        std::size_t kk = 0;
        for (int j = 0; j < window; ++j)
          if (j != k) key[kk++] = y[static_cast<std::size_t>(j)];
        auto& cc = coarse[key];
        cc.first += prob * y[static_cast<std::size_t>(k)];
        cc.second += prob;
        auto fkey = idx;
        fkey[target] = C;
        auto& ff = fine[fkey];
        ff.first += prob * y[static_cast<std::size_t>(k)];
        ff.second += prob;
      }
      for (const auto& [_, nd] : fine)
        if (nd.second > 0.0) worst_fine = std::max(worst_fine, std::abs(nd.first / nd.second));
    }
    for (const auto& [_, nd] : coarse)
      if (nd.second > 0.0) worst_coarse = std::max(worst_coarse, std::abs(nd.first / nd.second));
  }
  ProbeResult r;
  r.name = "mds";
  r.n = window;
  r.value = std::max(worst_fine, worst_coarse);
  r.bound = 1e-12;
  r.direction = Direction::AtMost;
  r.method = Method::Exact;
  r.extras = {{"cylinder_max", worst_fine},
              {"observable_max", worst_coarse},
              {"weight_paths", static_cast<double>(paths.size())},
              {"filter", opts.filter}};
  r.decide();
  return r;
}

ProbeResult mds_monte_carlo(const ProcessModel& model, std::size_t reps, std::uint64_t seed,
                            const MdsOptions& opts) {
  if (reps == 0) throw std::invalid_argument("Monte Carlo MDS test needs reps > 0");
  const int off = opts.filter != 0.0 ? 1 : 0;
  const int len = 3 + off;
  struct Bin {
    double count = 0.0, sum = 0.0, sumsq = 0.0;
  };
  using Bins = std::array<Bin, 9>;
  const std::size_t blocks = (reps + kMonteCarloBlock - 1) / kMonteCarloBlock;
  std::vector<Bins> per_block(blocks);
  const TrajectorySampler sampler(model.system);
  auto sign_bin = [](double v) { return v > 0.0 ? 2 : (v < 0.0 ? 0 : 1); };
  for_each_block(reps, default_workers(), [&](std::size_t block, std::size_t begin, std::size_t end) {
    Substream rng(seed, block);
    Bins& bins = per_block[block];
    std::array<double, 4> x{};
    for (std::size_t r = begin; r < end; ++r) {
      TowerState s = sampler.draw_stationary(rng);
      for (int i = 0; i < len; ++i) {
        if (i > 0) s = sampler.step(s, rng);
        x[static_cast<std::size_t>(i)] =
            model.weight[model.system.index(s)] * model.noise.draw(rng.uniform());
      }
      auto y = [&](int j) {
        return x[static_cast<std::size_t>(j + off)] + (off ? opts.filter * x[static_cast<std::size_t>(j)] : 0.0);
      };
      Bin& b = bins[static_cast<std::size_t>(3 * sign_bin(y(0)) + sign_bin(y(2)))];
      const double v = y(1);
      b.count += 1.0;
      b.sum += v;
      b.sumsq += v * v;
    }
  });
  Bins total{};
  for (const auto& bins : per_block)
    for (std::size_t i = 0; i < 9; ++i) {
      total[i].count += bins[i].count;
      total[i].sum += bins[i].sum;
      total[i].sumsq += bins[i].sumsq;
    }
  double worst = 0.0;
  int used = 0;
  for (const auto& b : total) {
    if (b.count < 30.0) continue;
    ++used;
    const double mean = b.sum / b.count;
    const double var = std::max(0.0, (b.sumsq / b.count - mean * mean) * b.count / (b.count - 1.0));
    const double se = std::sqrt(var / b.count);
    const double stat = se > 0.0 ? std::abs(mean) / se
                                 : (mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    worst = std::max(worst, stat);
  }
  ProbeResult r;
  r.name = "mds";
  r.n = 3;
  r.value = worst;
  r.bound = 4.0;
  r.direction = Direction::AtMost;
  r.method = Method::MonteCarlo;
  r.extras = {{"bins_used", static_cast<double>(used)},
              {"reps", static_cast<double>(reps)},
              {"filter", opts.filter}};
  r.decide();
  return r;
}

}  // namespace

ProbeResult mds_conditional_mean_test(const ProcessModel& model, int window, std::size_t reps,
                                      std::uint64_t seed, const MdsOptions& opts) {
  if (window < 1) throw std::invalid_argument("window must be at least 1");
  if (!opts.force_monte_carlo && window <= 6) {
    try {
      return mds_exact(model, window, opts);
    } catch (const BudgetHit&) {
      if (reps == 0) throw BudgetExceeded("exact MDS enumeration over budget and reps = 0");
    }
  }
  return mds_monte_carlo(model, reps, seed, opts);
}

double conditional_variance_floor(const ProcessModel& model, int depth) {
  if (depth < 0) throw std::invalid_argument("depth must be nonnegative");
  const auto& sys = model.system;
  const double var_g = model.noise.variance();
  const auto pi = stationary_measure(sys);
  if (depth == 0) {
    double s = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) s += pi[i] * model.weight[i] * model.weight[i];
    return var_g * s;
  }
  // The chain is Markov, so any history only matters through its last state.
  double floor = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < sys.tower_count(); ++l) {
    const auto begin = sys.tower_begin(l);
    const auto h = static_cast<std::size_t>(sys.towers()[l].height);
    for (std::size_t j = 0; j < h; ++j) {
      if (pi[begin + j] <= 0.0) continue;
      double next;
      if (j + 1 < h) {
        next = model.weight[begin + j + 1] * model.weight[begin + j + 1];
      } else {
        next = 0.0;
        const auto& row = sys.top_row(l);
        for (std::size_t d = 0; d < row.size(); ++d) {
          const double w = model.weight[sys.tower_begin(d)];
          next += row[d] * w * w;
        }
      }
      floor = std::min(floor, var_g * next);
    }
  }
  return floor;
}

ProbeResult variance_probe(const ProcessModel& model, const Schedule* sched) {
  const double closed = variance_of_f(model);
  const double direct = stationary_variance(model);
  ProbeResult r;
  r.name = "variance";
  r.value = std::abs(closed - direct);
  r.bound = 1e-12;
  r.direction = Direction::AtMost;
  r.method = Method::Exact;
  r.extras = {{"variance_of_f", closed}, {"stationary_sum", direct}};
  if (sched && sched->variant == Variant::Thm2) {
    const double gap = std::abs(direct - sched->sigma2_closed_form);
    r.extras.push_back({"sigma2_closed_form", sched->sigma2_closed_form});
    r.extras.push_back({"truncation_remainder", sched->truncation_remainder});
    r.checks.push_back({"closed_form_within_truncation", gap <= sched->truncation_remainder + 1e-12});
  }
  if (model.noise.kind == NoiseSpec::Kind::Lattice) {
    r.extras.push_back({"floor_depth0", conditional_variance_floor(model, 0)});
    r.extras.push_back({"floor_depth1", conditional_variance_floor(model, 1)});
    r.extras.push_back({"floor_depth2", conditional_variance_floor(model, 2)});
  }
  r.decide();
  return r;
}

ProbeResult density_bound_probe(const ProcessModel& model, const Schedule& sched) {
  require_density(model, sched);
  const PiecewiseDensity dens = density_of_f(model);
  ProbeResult r;
  r.name = "density_bound";
  r.value = dens.max_value();
  r.bound = bounds::density(sched);
  r.direction = Direction::AtMost;
  r.method = Method::Exact;
  r.tolerance = 1e-12;
  const double integral = dens.integral();
  bool symmetric = dens.breakpoints.size() == dens.values.size() + 1;
  for (std::size_t i = 0; symmetric && i < dens.values.size(); ++i)
    symmetric = dens.values[i] == dens.values[dens.values.size() - 1 - i] &&
                dens.breakpoints[i] == -dens.breakpoints[dens.breakpoints.size() - 1 - i];
  r.extras = {{"integral", integral}, {"pieces", static_cast<double>(dens.values.size())}};
  r.checks = {{"integral_is_one", std::abs(integral - 1.0) <= 1e-10}, {"symmetric", symmetric}};
  r.decide();
  return r;
}

double gnedenko_baseline(const LatticeDistribution& step_law, double b, double h, std::int64_t n) {
  if (!(h > 0.0)) throw std::invalid_argument("lattice step must be positive");
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  for (std::int64_t x = step_law.min_support(); x <= step_law.max_support(); ++x) {
    if (step_law.at(x) <= 0.0) continue;
    const double q = (static_cast<double>(x) - b) / h;
    if (std::abs(q - std::round(q)) > 1e-9)
      throw LatticeMismatch("atom " + std::to_string(x) + " is not on the declared lattice");
  }
  const double m = step_law.mean();
  const double var = step_law.variance();
  if (!(var > 0.0)) throw LatticeMismatch("step law has zero variance");

  LatticeDistribution power = LatticeDistribution::point_mass(0), base = step_law;
  for (std::int64_t e = n; e > 0; e >>= 1) {
    if (e & 1) power = convolve(power, base);
    if (e > 1) base = convolve(base, base);
  }
  const double nn = static_cast<double>(n);
  const double scale = std::sqrt(var * nn);
  const double shift = nn * b;
  const auto first = static_cast<std::int64_t>(
      std::floor((static_cast<double>(power.min_support()) - h - shift) / h));
  const auto last = static_cast<std::int64_t>(
      std::ceil((static_cast<double>(power.max_support()) + h - shift) / h));
  double worst = 0.0;
  for (std::int64_t N = first; N <= last; ++N) {
    const double x = shift + static_cast<double>(N) * h;
    const double r = std::round(x);
    const double p = std::abs(x - r) <= 1e-9 ? power.at(static_cast<std::int64_t>(r)) : 0.0;
    worst = std::max(worst, std::abs(scale / h * p - normal_pdf((x - nn * m) / scale)));
  }
  return worst;
}

}  // namespace mdsllt
