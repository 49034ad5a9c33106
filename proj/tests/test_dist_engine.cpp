#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <cstdlib>

#include "mdsllt/construction.hpp"
#include "mdsllt/dist_engine.hpp"
#include "mdsllt/errors.hpp"
#include "mdsllt/lattice.hpp"
#include "oracles.hpp"

using namespace mdsllt;

namespace {

// Phi(x) to 30 significant digits, generated once with mpmath (dps = 40).
struct PhiRef {
  double x;
  const char* value;
};
const PhiRef kPhiTable[] = {
    {-40, "3.65589354091502970374898580269e-350"},
    {-12, "1.77648211207767899769617100185e-33"},
    {-8, "6.22096057427178412351599517259e-16"},
    {-6, "9.86587645037698140700864132398e-10"},
    {-5, "0.000000286651571879193911673752332875"},
    {-4, "0.0000316712418331199212537707567222"},
    {-3, "0.00134989803163009452665181476759"},
    {-2.5, "0.00620966532577613516697810457419"},
    {-2, "0.0227501319481792072002826371665"},
    {-1.5, "0.0668072012688580660044940409799"},
    {-1, "0.158655253931457051414767454368"},
    {-0.75, "0.226627352376868199327062169383"},
    {-0.5, "0.308537538725986896362295389392"},
    {-0.25, "0.401293674317076275759146208419"},
    {-0.1, "0.460172162722971018534595381761"},
    {-0.01, "0.496010643685368396298210002092"},
    {0, "0.5"},
    {0.01, "0.503989356314631603701789997908"},
    {0.1, "0.539827837277028981465404618239"},
    {0.25, "0.598706325682923724240853791581"},
    {0.5, "0.691462461274013103637704610608"},
    {0.75, "0.773372647623131800672937830617"},
    {1, "0.841344746068542948585232545632"},
    {1.5, "0.93319279873114193399550595902"},
    {2, "0.977249868051820792799717362833"},
    {2.5, "0.993790334674223864833021895426"},
    {3, "0.998650101968369905473348185232"},
    {4, "0.999968328758166880078746229243"},
    {5, "0.999999713348428120806088326248"},
    {6, "0.999999999013412354962301859299"},
    {8, "0.999999999999999377903942572822"},
    {12, "1.0"},
};

// Lattice model on a small hand-built system; `active` marks weight one.
ProcessModel small_model(std::vector<TowerSpec> specs, std::vector<char> active, double a) {
  ProcessModel m;
  m.variant = Variant::Thm1;
  m.system = TowerSystem::build(std::move(specs));
  m.noise = NoiseSpec::lattice(a);
  m.weight.assign(active.begin(), active.end());
  const auto pi = stationary_measure(m.system);
  for (std::size_t i = 0; i < pi.size(); ++i)
    if (!active[i]) m.mu_A += pi[i];
  m.sigma2 = a * (1.0 - m.mu_A);
  return m;
}

oracle::Chain as_chain(const TowerSystem& sys) {
  std::vector<std::int64_t> h;
  std::vector<double> w;
  for (const auto& t : sys.towers()) {
    h.push_back(t.height);
    w.push_back(t.mass);
  }
  return {h, w};
}

// P(|g1 + g2| <= sqrt 2) by hand. With I = [1/2, 1]: I + I and (-I) + (-I)
// are triangles of mass 1/4 on [1, 2] and [-2, -1] with density x - 1 on
// [1, 3/2]; the two cross terms put mass 1/2 on [-1/2, 1/2].
double exact_b2() {
  const double r = std::sqrt(2.0) - 1.0;
  return 0.5 + 2.0 * (r * r / 2.0);
}

}  // namespace

TEST_CASE("normal_cdf against the 30-digit reference table") {
  for (const auto& row : kPhiTable) {
    const double ref = std::strtod(row.value, nullptr);  // underflows to 0 at -40
    CHECK_MESSAGE(std::abs(normal_cdf(row.x) - ref) <= 1e-12, "x = " << row.x);
  }
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(-40.0) < 1e-300);
  CHECK(std::abs(normal_cdf(1.0) - 0.8413447460685429) <= 1e-12);
  double prev = 0.0;
  for (double x = -10.0; x <= 10.0; x += 0.001) {
    const double v = normal_cdf(x);
    CHECK(v >= prev);
    prev = v;
    if (std::abs(normal_cdf(x) + normal_cdf(-x) - 1.0) > 1e-12) FAIL("symmetry at " << x);
  }
}

TEST_CASE("symmetric_step_sum") {
  const auto zero = symmetric_step_sum(0.3, 0);
  CHECK(zero.at(0) == 1.0);
  const auto two = symmetric_step_sum(1.0, 2);
  CHECK(two.at(-2) == 0.25);
  CHECK(two.at(0) == 0.5);
  CHECK(two.at(2) == 0.25);
  CHECK(two.at(1) == 0.0);
  for (double a : {0.5, 0.1, 0.77, 1.0}) {
    for (int m = 0; m <= 6; ++m) {
      const auto got = symmetric_step_sum(a, m);
      const auto want = oracle::step_sum(a, m);
      CHECK(got.min_support() >= -m);
      CHECK(got.max_support() <= m);
      for (int x = -m; x <= m; ++x) {
        const double w = want.count(x) ? want.at(x) : 0.0;
        CHECK(std::abs(got.at(x) - w) < 1e-14);
        CHECK(std::abs(got.at(x) - got.at(-x)) < 1e-15);
      }
    }
  }
}

TEST_CASE("lattice_sum_distribution examples") {
  const auto iid = make_iid_model(NoiseSpec::lattice(1.0));
  const auto law = lattice_sum_distribution(iid, 2);
  CHECK(law.at(-2) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(law.at(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(law.at(2) == doctest::Approx(0.25).epsilon(1e-15));

  const auto s = derive_schedule_thm1(RateSequence::power_law(0.5, 0.5), 3);
  const auto m = build_counterexample(s, NoiseSpec::lattice(1.0));
  const auto l16 = lattice_sum_distribution(m, 16);
  CHECK(l16.at(0) >= 0.125);
  CHECK(std::abs(l16.total() - 1.0) < 1e-12);
  CHECK(std::abs(l16.mean()) < 1e-10);
  CHECK(std::abs(l16.variance() / (16.0 * m.sigma2) - 1.0) < 1e-8);

  const auto d = build_counterexample(derive_schedule_thm2(RateSequence::power_law(0.1, 0.5), 1, 100, 3, 2),
                                      NoiseSpec::two_interval());
  CHECK_THROWS_AS(lattice_sum_distribution(d, 4), VariantMismatch);
}

TEST_CASE("lattice_sum_distribution equals path enumeration (property)") {
  std::mt19937_64 rng(8080);
  std::uniform_int_distribution<int> towers(1, 4), height(1, 9);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<TowerSpec> specs(static_cast<std::size_t>(towers(rng)));
    double total = 0.0;
    for (auto& t : specs) {
      t.height = height(rng);
      t.mass = unit(rng);
      total += t.mass;
    }
    for (auto& t : specs) t.mass /= total;
    std::size_t states = 0;
    for (const auto& t : specs) states += static_cast<std::size_t>(t.height);
    std::vector<char> active(states);
    for (auto& a : active) a = rng() % 3 != 0 ? 1 : 0;
    active[0] = 1;
    const double a = std::min(1.0, unit(rng));
    const auto model = small_model(specs, active, a);
    const auto chain = as_chain(model.system);
    const auto pi = chain.stationary();
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 6);
    const auto want = oracle::partial_sum_law(chain, pi, active, a, n);
    const auto got = lattice_sum_distribution(model, n);
    for (std::int64_t x = -n; x <= n; ++x) {
      const double w = want.count(x) ? want.at(x) : 0.0;
      CHECK(std::abs(got.at(x) - w) < 1e-10);
      CHECK(std::abs(got.at(x) - got.at(-x)) < 1e-12);
    }
  }
}

TEST_CASE("interval_probability") {
  const auto full = interval_probability({1.0}, 1.0);
  CHECK(std::abs(full.value - 1.0) <= full.error + 1e-12);
  const auto gap = interval_probability({1.0}, 0.49);
  CHECK(std::abs(gap.value) <= gap.error + 1e-12);

  const double u = std::sqrt(2.0);
  const auto grid = interval_probability({1.0, 1.0}, u);
  CHECK(grid.error <= 1e-6);
  CHECK(std::abs(grid.value - exact_b2()) <= grid.error);

  const std::size_t reps = 10'000'000;
  const auto mc = interval_probability_monte_carlo({1.0, 1.0}, u, reps, 17);
  CHECK(mc.method == IntervalProbability::Method::MonteCarlo);
  CHECK(std::abs(mc.value - grid.value) <= 4.0 * mc.error + grid.error);

  // Halving the step changes the value by less than the reported bound.
  const std::vector<double> coeffs{0.3, 0.7, 1.0, 0.05, 0.5};
  IntervalOptions coarse;
  coarse.max_refinement = 12;
  const auto fine = interval_probability(coeffs, 0.8);
  const auto rough = interval_probability(coeffs, 0.8, coarse);
  CHECK(std::abs(fine.value - rough.value) <= rough.error);

  IntervalOptions none;
  none.allow_grid = false;
  none.allow_monte_carlo = false;
  CHECK_THROWS_AS(interval_probability(coeffs, 0.8, none), BudgetExceeded);
}

TEST_CASE("grid discretisation keeps the mass") {
  const auto g = discretize(two_interval_uniform_density(), 1.0 / 1024.0);
  CHECK(std::abs(g.total() - 1.0) < 1e-12);
  const auto h = discretize(scaled(two_interval_uniform_density(), 0.37), 0.37 / 1000.0);
  CHECK(std::abs(h.total() - 1.0) < 1e-9);
}

TEST_CASE("kolmogorov_distance") {
  CHECK(kolmogorov_distance(LatticeDistribution::point_mass(0), 1.0, 1) == 0.5);
  LatticeDistribution coin{-1, {0.5, 0.0, 0.5}};
  CHECK(std::abs(kolmogorov_distance(coin, 1.0, 1) - 0.3413447460685429) < 1e-9);

  const auto iid = make_iid_model(NoiseSpec::lattice(1.0));
  const auto k25 = kolmogorov_distance(lattice_sum_distribution(iid, 25), 1.0, 25);
  const auto k100 = kolmogorov_distance(lattice_sum_distribution(iid, 100), 1.0, 100);
  CHECK(k100 < k25);

  // Cheap lower bound: the gap at the origin.
  const auto law = lattice_sum_distribution(iid, 100);
  double below = 0.0;
  for (std::int64_t x = law.min_support(); x < 0; ++x) below += law.at(x);
  CHECK(k100 >= std::abs(below - 0.5) - 1e-15);
}

TEST_CASE("sample_partial_sums") {
  const auto iid = make_iid_model(NoiseSpec::lattice(1.0));
  const std::size_t reps = 100'000;
  const std::int64_t n = 50;
  const auto xs = sample_partial_sums(iid, n, reps, 3);
  REQUIRE(xs.size() == reps);
  double mean = 0.0;
  for (double x : xs) mean += x / std::sqrt(static_cast<double>(n));
  mean /= static_cast<double>(reps);
  CHECK(std::abs(mean) <= 4.0 / std::sqrt(static_cast<double>(reps)));

  CHECK(sample_partial_sums(iid, n, 1, 3).size() == 1);
  CHECK(sample_partial_sums(iid, n, 10'000, 3) == sample_partial_sums(iid, n, 10'000, 3));

  const auto s = derive_schedule_thm3(RateSequence::power_law(0.25, 0.5), 3);
  const auto m = build_counterexample(s, NoiseSpec::lattice(1.0));
  CHECK(sample_partial_sums(m, 16, 20'000, 9, 1) == sample_partial_sums(m, 16, 20'000, 9, 3));
}

TEST_CASE("Monte Carlo agrees with the exact law on the desk model") {
  const auto s = derive_schedule_thm3(RateSequence::power_law(0.25, 0.5), 3);
  const auto m = build_counterexample(s, NoiseSpec::lattice(1.0));
  const std::int64_t n = 16;
  const auto exact = lattice_sum_distribution(m, n);
  const std::size_t reps = 200'000;
  const auto xs = sample_partial_sums(m, n, reps, 21);
  for (std::int64_t x : {-2, 0, 1, 4}) {
    double hits = 0.0;
    for (double v : xs) hits += v == static_cast<double>(x) ? 1.0 : 0.0;
    const double p = exact.at(x);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
    CHECK(std::abs(hits / static_cast<double>(reps) - p) <= 4.0 * se);
  }
}
