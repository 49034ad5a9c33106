#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <random>

#include "mdsllt/diagnostics.hpp"
#include "mdsllt/errors.hpp"
#include "oracles.hpp"

using namespace mdsllt;

namespace {

const RateSequence kThm1Rate = RateSequence::power_law(0.5, 0.5);
const RateSequence kThm3Rate = RateSequence::power_law(0.25, 0.5);
const RateSequence kThm2Rate = RateSequence::power_law(0.1, 0.5);

struct Desk {
  Schedule sched;
  ProcessModel model;
};

const Desk& thm1() {
  static const Desk d = [] {
    auto s = derive_schedule_thm1(kThm1Rate, 3);
    auto m = build_counterexample(s, NoiseSpec::lattice(1.0));
    return Desk{s, m};
  }();
  return d;
}

const Desk& thm3() {
  static const Desk d = [] {
    auto s = derive_schedule_thm3(kThm3Rate, 3);
    auto m = build_counterexample(s, NoiseSpec::lattice(1.0));
    return Desk{s, m};
  }();
  return d;
}

const Desk& thm2() {
  static const Desk d = [] {
    auto s = derive_schedule_thm2(kThm2Rate, 1.0, 100.0, 3.0, 4);
    auto m = build_counterexample(s, NoiseSpec::two_interval());
    return Desk{s, m};
  }();
  return d;
}

// Enumerable lattice model: towers of heights 3, 4, 5 with one A-block.
Desk small_lattice() {
  Schedule s;
  s.variant = Variant::Thm1;
  s.n = {2};
  s.a_n = {0.01};
  s.height = {5};
  s.p = {0.4};
  s.d = {0.3};
  s.rho = {0.5};
  s.remainder_height = 3;
  s.remainder_mass = 0.6;
  auto m = build_counterexample(s, NoiseSpec::lattice(0.6));
  return {s, m};
}

ProbeOptions quick() {
  ProbeOptions o;
  o.seed = 3;
  o.mc_reps = 50'000;
  return o;
}

}  // namespace

TEST_CASE("probe decision rule") {
  ProbeResult r;
  r.value = 0.2;
  r.bound = 0.1;
  r.direction = Direction::AtLeast;
  r.error = 0.05;
  r.decide();
  CHECK(r.pass);
  r.error = 0.15;
  r.decide();
  CHECK_FALSE(r.pass);
  r.direction = Direction::AtMost;
  r.value = 0.05;
  r.error = 0.0;
  r.decide();
  CHECK(r.pass);
  r.checks.push_back({"side", false});
  r.decide();
  CHECK_FALSE(r.pass);
  CHECK_THROWS(r.extra("missing"));
}

TEST_CASE("llt probe on the desk instances") {
  const auto& d = thm1();
  const auto r = llt_probe_lattice(d.model, d.sched, 0, quick());
  CHECK(r.method == Method::Exact);
  CHECK(r.bound == 0.125);
  CHECK(r.value >= 0.125);
  CHECK(r.pass);
  CHECK(r.extra("intermediate_bound") == d.sched.d[0] * (1.0 - d.sched.rho[0]));
  CHECK(r.value >= r.extra("intersection"));

  const auto iid = make_iid_model(NoiseSpec::lattice(1.0));
  CHECK(std::abs(llt_probe_lattice(iid, 2, 0.1).value - 0.5) < 1e-15);

  const auto& t = thm3();
  for (int k = 0; k < 3; ++k) {
    const auto p = llt_probe_lattice(t.model, t.sched, k, quick());
    const double quarter = t.sched.p[static_cast<std::size_t>(k)] / 4.0;
    CHECK(p.extra("intermediate_bound") == quarter);
    CHECK(p.extra("intersection") >= quarter);
    CHECK(quarter >= t.sched.a_n[static_cast<std::size_t>(k)] * (1.0 - 1e-15));
    CHECK(p.pass);
  }
  CHECK_THROWS_AS(llt_probe_lattice(thm2().model, thm2().sched, 1), VariantMismatch);
}

TEST_CASE("clt probe") {
  const auto& d = thm1();
  for (int k = 0; k < 3; ++k) {
    const auto r = clt_probe(d.model, d.sched, k, quick());
    CHECK(r.bound == d.sched.a_n[static_cast<std::size_t>(k)] / 2.0);
    CHECK(r.pass);
  }
  const auto iid = make_iid_model(NoiseSpec::lattice(1.0));
  const auto r400 = clt_probe(iid, 400, 0.8 / std::sqrt(400.0));
  CHECK(r400.direction == Direction::AtMost);
  CHECK(r400.value <= 0.04);
  CHECK(r400.pass);
}

TEST_CASE("density probes on the thm2 instance") {
  const auto& d = thm2();
  auto opts = quick();
  const auto r = llt_probe_density(d.model, d.sched, 1, opts);
  const double sigma = std::sqrt(d.model.sigma2);
  CHECK(std::abs(r.value - r.extra("b") * d.sched.p[1] / (2.0 * d.sched.d[1]) * sigma) < 1e-15);
  CHECK(r.extra("b_error") <= 1e-6);
  CHECK(r.value >= 3.0);
  CHECK(r.pass);
  CHECK(std::abs(r.extra("llt_reference") - 0.7978845608028654) < 1e-15);
  CHECK(r.extra("small_ball_monte_carlo") >=
        r.extra("small_ball_lower") - 4.0 * r.extra("small_ball_monte_carlo_se"));
  CHECK_THROWS_AS(llt_probe_density(d.model, d.sched, 0, opts), EvenIndex);

  const auto c = clt_probe(d.model, d.sched, 3, opts);
  CHECK(c.bound == d.sched.a_n[3]);
  CHECK(c.pass);
  CHECK_THROWS_AS(clt_probe(d.model, d.sched, 2, opts), EvenIndex);

  const auto dens = density_bound_probe(d.model, d.sched);
  CHECK(dens.bound == 101.0);
  CHECK(dens.value <= 101.0);
  CHECK(dens.pass);
  const auto var = variance_probe(d.model, &d.sched);
  CHECK(var.pass);
}

TEST_CASE("single block contrast: the density ratio near 0 against 2 phi(0)") {
  // f = g: (1/rho) P(|S_n / (sigma sqrt n)| <= rho) at small rho is twice the
  // density of the standardised sum at 0. For n = 2 the density of g1 + g2
  // at 0 is 1, so the limit is 2 sigma sqrt 2.
  const double sigma = std::sqrt(7.0 / 12.0);
  auto ratio = [&](int n, double rho) {
    const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
    return interval_probability(ones, rho * sigma * std::sqrt(static_cast<double>(n))).value / rho;
  };
  const double r2 = ratio(2, 1e-3);
  CHECK(std::abs(r2 - 2.0 * sigma * std::sqrt(2.0)) < 5e-3);
  const double ref = 2.0 * normal_pdf(0.0);
  const double r24 = ratio(24, 1e-2);
  CHECK(std::abs(r24 - ref) < std::abs(r2 - ref));
  CHECK(std::abs(r24 - ref) < 0.05);
}

TEST_CASE("exact MDS test") {
  const auto iid = make_iid_model(NoiseSpec::lattice(1.0));
  for (int w = 1; w <= 6; ++w) {
    const auto r = mds_conditional_mean_test(iid, w, 0, 1);
    CHECK(r.method == Method::Exact);
    CHECK(r.value == 0.0);
  }
  const auto& d = thm1();
  const auto r = mds_conditional_mean_test(d.model, 4, 0, 1);
  CHECK(r.method == Method::Exact);
  CHECK(r.value <= 1e-12);
  CHECK(r.pass);
  const auto small = small_lattice();
  CHECK(small.model.system.state_count() <= 100);
  CHECK(mds_conditional_mean_test(small.model, 4, 0, 1).value <= 1e-12);
  CHECK(mds_conditional_mean_test(thm2().model, 3, 0, 1).value <= 1e-12);
}

TEST_CASE("Monte Carlo MDS test and its control") {
  MdsOptions mc;
  mc.force_monte_carlo = true;
  const auto& d = thm3();
  const auto own = mds_conditional_mean_test(d.model, 3, 200'000, 5, mc);
  CHECK(own.method == Method::MonteCarlo);
  CHECK(own.pass);
  mc.filter = 0.5;
  const auto control = mds_conditional_mean_test(d.model, 3, 200'000, 6, mc);
  CHECK_FALSE(control.pass);
  CHECK(control.value > 4.0);
  const auto iid = make_iid_model(NoiseSpec::lattice(1.0));
  mc.filter = 0.0;
  CHECK(mds_conditional_mean_test(iid, 3, 200'000, 7, mc).pass);
}

TEST_CASE("conditional variance floor") {
  const auto iid = make_iid_model(NoiseSpec::lattice(1.0));
  CHECK(conditional_variance_floor(iid, 0) == 1.0);
  CHECK(conditional_variance_floor(iid, 3) == 1.0);
  const auto& d = thm1();
  CHECK(conditional_variance_floor(d.model, 2) == 0.0);
  const auto small = small_lattice();
  double prev = 1.0;
  for (int depth = 0; depth <= 4; ++depth) {
    const double v = conditional_variance_floor(small.model, depth);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("beta mixing examples") {
  const TowerSystem point;
  for (double b : beta_curve(point, 10)) CHECK(b == 0.0);

  const auto cyc = TowerSystem::build({{3, 1.0}});
  const auto c = beta_curve(cyc, 20);
  for (std::size_t n = 1; n < c.size(); ++n) CHECK(std::abs(c[n] - 2.0 / 3.0) < 1e-15);
  CHECK(mixing_profile(cyc, {1, 2}).periodic);

  const auto sys = TowerSystem::build({{2, 0.4}, {3, 0.6}});
  const auto b = beta_curve(sys, 200);
  for (std::size_t n = 1; n < b.size(); ++n)
    if (b[n - 1] > 1e-13) CHECK(b[n] < b[n - 1]);
  CHECK(b[200] < 1e-6);
  const auto prof = mixing_profile(sys, {0, 5, 50});
  CHECK_FALSE(prof.periodic);
  CHECK(prof.alpha_upper == prof.beta);
}

TEST_CASE("beta curve agrees with dense matrix powers (property)") {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<int> towers(1, 4), height(1, 12);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<TowerSpec> specs(static_cast<std::size_t>(towers(rng)));
    double total = 0.0;
    for (auto& t : specs) {
      t.height = height(rng);
      t.mass = unit(rng);
      total += t.mass;
    }
    std::vector<std::int64_t> h;
    std::vector<double> m;
    for (auto& t : specs) {
      t.mass /= total;
      h.push_back(t.height);
      m.push_back(t.mass);
    }
    const auto sys = TowerSystem::build(specs);
    const oracle::Chain chain(h, m);
    const auto want = oracle::beta_curve(chain, chain.stationary(), 60);
    const auto got = beta_curve(sys, 60);
    for (std::size_t n = 0; n < want.size(); ++n) CHECK(std::abs(got[n] - want[n]) < 1e-9);

    // Non-uniform rows that keep the masses: w_ld = (1 - t) q_d + t [l = d].
    const double t = 0.3;
    std::vector<double> q(h.size());
    double z = 0.0;
    for (std::size_t l = 0; l < h.size(); ++l) z += m[l] / static_cast<double>(h[l]);
    for (std::size_t l = 0; l < h.size(); ++l) q[l] = m[l] / static_cast<double>(h[l]) / z;
    std::vector<std::vector<double>> rows(h.size(), std::vector<double>(h.size()));
    for (std::size_t l = 0; l < h.size(); ++l)
      for (std::size_t d = 0; d < h.size(); ++d) rows[l][d] = (1.0 - t) * q[d] + (l == d ? t : 0.0);
    const auto lazy = TowerSystem::with_transitions(specs, rows);
    const oracle::Chain lazy_chain(h, m, rows);
    const auto want2 = oracle::beta_curve(lazy_chain, lazy_chain.stationary(), 60);
    const auto got2 = beta_curve(lazy, 60);
    for (std::size_t n = 0; n < want2.size(); ++n) CHECK(std::abs(got2[n] - want2[n]) < 1e-9);
  }
}

TEST_CASE("thm3 mixing lags") {
  auto s = thm3().sched;
  const auto probes = mixing_probes(s);
  REQUIRE(probes.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(probes[k].pass);
    CHECK(probes[k].value <= 7.0 * s.eps[k]);
    CHECK(probes[k].extra("beta_at_lag") <= s.eps[k]);
    if (k > 0) CHECK(s.mixing_lag[k] >= s.mixing_lag[k - 1]);
  }
  const auto chain = thm3_chain(s);
  CHECK(chain.state_count() <= 10'000);
  const auto curve = beta_curve(chain, s.mixing_lag[0]);
  CHECK(curve[static_cast<std::size_t>(s.mixing_lag[0] - 1)] > s.eps[0]);
  CHECK_THROWS_AS(thm3_chain(thm1().sched), VariantMismatch);
}

TEST_CASE("Gnedenko baseline") {
  const auto coin = symmetric_step_sum(1.0, 1);
  const double g100 = gnedenko_baseline(coin, -1.0, 2.0, 100);
  const double g200 = gnedenko_baseline(coin, -1.0, 2.0, 200);
  const double g400 = gnedenko_baseline(coin, -1.0, 2.0, 400);
  CHECK(g400 < g200);
  CHECK(g200 < g100);
  for (std::int64_t n : {100, 200, 400}) CHECK(gnedenko_baseline(coin, 0.0, 1.0, n) >= 0.1);
  CHECK_THROWS_AS(gnedenko_baseline(coin, 0.0, 2.0, 10), LatticeMismatch);
  CHECK_THROWS_AS(gnedenko_baseline(LatticeDistribution::point_mass(0), 0.0, 1.0, 1), LatticeMismatch);
}

TEST_CASE("variance probe") {
  const auto& d = thm1();
  const auto r = variance_probe(d.model, &d.sched);
  CHECK(r.pass);
  CHECK(r.extra("floor_depth2") == 0.0);
  CHECK(r.extra("floor_depth0") == d.model.sigma2);
}

TEST_CASE("strong MDS by direct enumeration of paths and noise") {
  // Conditional mean of f at each window position given every other f value
  // and the full state path; computed without the library's test.
  const auto small = small_lattice();
  const auto& sys = small.model.system;
  std::vector<std::int64_t> h;
  std::vector<double> m;
  for (const auto& t : sys.towers()) {
    h.push_back(t.height);
    m.push_back(t.mass);
  }
  const oracle::Chain chain(h, m);
  const auto pi = chain.stationary();
  const int w = 4;
  const double a = 0.6, pg[3] = {a / 2.0, 1.0 - a, a / 2.0};
  for (int k = 0; k < w; ++k) {
    std::map<std::vector<double>, std::pair<double, double>> cells, coarse;
    oracle::enumerate_paths(chain, pi, w, [&](double p, const std::vector<std::size_t>& path) {
      for (int o = 0; o < 81; ++o) {
        int code = o;
        double q = p;
        std::vector<double> f(w);
        for (int i = 0; i < w; ++i) {
          const int g = code % 3;
          code /= 3;
          q *= pg[g];
          f[static_cast<std::size_t>(i)] = small.model.weight[path[static_cast<std::size_t>(i)]] * (g - 1);
        }
        std::vector<double> key, obs;
        for (int i = 0; i < w; ++i) {
          key.push_back(static_cast<double>(path[static_cast<std::size_t>(i)]));
          if (i != k) {
            key.push_back(f[static_cast<std::size_t>(i)]);
            obs.push_back(f[static_cast<std::size_t>(i)]);
          }
        }
        auto& c = cells[key];
        c.first += q;
        c.second += q * f[static_cast<std::size_t>(k)];
        auto& o2 = coarse[obs];
        o2.first += q;
        o2.second += q * f[static_cast<std::size_t>(k)];
      }
    });
    for (const auto& [key, c] : cells)
      if (c.first > 0.0) CHECK(std::abs(c.second / c.first) < 1e-12);
    for (const auto& [key, c] : coarse)
      if (c.first > 0.0) CHECK(std::abs(c.second / c.first) < 1e-12);
  }
}
