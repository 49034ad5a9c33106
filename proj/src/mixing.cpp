#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdsllt/diagnostics.hpp"
#include "mdsllt/errors.hpp"

namespace mdsllt {

namespace {

// Every row equal to w: the chain regenerates at each visit to a base, so
// all laws follow from the renewal sequence u_s = P(at some base at time s).
std::vector<double> beta_curve_renewal(const TowerSystem& sys, std::int64_t horizon) {
  const std::size_t T = sys.tower_count();
  const auto& w = sys.top_row(0);
  std::vector<std::int64_t> N(T);
  std::vector<double> pi(T);
  double W = 0.0;
  for (std::size_t l = 0; l < T; ++l) {
    N[l] = sys.towers()[l].height;
    pi[l] = sys.level_measure(l);
    W += pi[l];
  }
  const std::int64_t nmax = sys.max_height();
  const auto H = static_cast<std::size_t>(horizon);

  std::vector<double> u(H + 1, 0.0);
  u[0] = 1.0;
  for (std::int64_t s = 1; s <= horizon; ++s) {
    double v = 0.0;
    for (std::size_t l = 0; l < T; ++l)
      if (s >= N[l]) v += w[l] * u[static_cast<std::size_t>(s - N[l])];
    u[static_cast<std::size_t>(s)] = v;
  }
  // pd[x + nmax + 1] = Sum_{s = -nmax}^{x} D_s, with D_s = W for s < 0.
  std::vector<long double> pd(H + static_cast<std::size_t>(nmax) + 2, 0.0L);
  for (std::int64_t x = -nmax; x <= horizon; ++x) {
    const double D = x < 0 ? W : std::abs(u[static_cast<std::size_t>(x)] - W);
    const auto i = static_cast<std::size_t>(x + nmax + 1);
    pd[i] = pd[i - 1] + D;
  }
  auto PD = [&](std::int64_t x) { return pd[static_cast<std::size_t>(x + nmax + 1)]; };

  // pt[t + 1] = Sum_{s <= t} tv[s]
  std::vector<long double> pt(H + 1, 0.0L);
  for (std::int64_t t = 0; t < horizon; ++t) {
    long double v = 0.0L;
    for (std::size_t l = 0; l < T; ++l) v += w[l] * (PD(t) - PD(t - N[l]));
    pt[static_cast<std::size_t>(t + 1)] = pt[static_cast<std::size_t>(t)] + v / 2.0L;
  }

  std::vector<double> beta(H + 1);
  for (std::int64_t n = 0; n <= horizon; ++n) {
    long double b = 0.0L;
    for (std::size_t l = 0; l < T; ++l) {
      b += static_cast<long double>(pi[l]) * (1.0L - pi[l]) *
           static_cast<long double>(std::max<std::int64_t>(0, N[l] - n));
      const std::int64_t lo = std::max<std::int64_t>(0, n - N[l]);
      if (n > lo)
        b += pi[l] * (pt[static_cast<std::size_t>(n)] - pt[static_cast<std::size_t>(lo)]);
    }
    beta[static_cast<std::size_t>(n)] = std::clamp(static_cast<double>(b), 0.0, 1.0);
  }
  return beta;
}

// General rows: one propagated law per origin tower, started just after
// leaving its top.
std::vector<double> beta_curve_general(const TowerSystem& sys, std::int64_t horizon) {
  const std::size_t T = sys.tower_count(), S = sys.state_count();
  if (static_cast<double>(T) * static_cast<double>(S) * static_cast<double>(horizon) > 5e9)
    throw BudgetExceeded("beta curve: system too large for general transition rows");
  const auto pi = stationary_measure(sys);
  const auto H = static_cast<std::size_t>(horizon);
  std::vector<std::vector<long double>> pt(T, std::vector<long double>(H + 1, 0.0L));
  for (std::size_t l = 0; l < T; ++l) {
    std::vector<double> law(S, 0.0);
    const auto& row = sys.top_row(l);
    for (std::size_t d = 0; d < T; ++d) law[sys.tower_begin(d)] += row[d];
    for (std::size_t t = 0; t < H; ++t) {
      double tv = 0.0;
      for (std::size_t s = 0; s < S; ++s) tv += std::abs(law[s] - pi[s]);
      pt[l][t + 1] = pt[l][t] + tv / 2.0;
      if (t + 1 < H) law = push_forward(sys, law);
    }
  }
  std::vector<double> beta(H + 1);
  for (std::int64_t n = 0; n <= horizon; ++n) {
    long double b = 0.0L;
    for (std::size_t l = 0; l < T; ++l) {
      const double p = sys.level_measure(l);
      const std::int64_t N = sys.towers()[l].height;
      b += static_cast<long double>(p) * (1.0L - p) *
           static_cast<long double>(std::max<std::int64_t>(0, N - n));
      const std::int64_t lo = std::max<std::int64_t>(0, n - N);
      if (n > lo) b += p * (pt[l][static_cast<std::size_t>(n)] - pt[l][static_cast<std::size_t>(lo)]);
    }
    beta[static_cast<std::size_t>(n)] = std::clamp(static_cast<double>(b), 0.0, 1.0);
  }
  return beta;
}

}  // namespace

std::vector<double> beta_curve(const TowerSystem& sys, std::int64_t horizon) {
  if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
  return sys.uniform_rows() ? beta_curve_renewal(sys, horizon) : beta_curve_general(sys, horizon);
}

std::vector<double> beta_curve_by_propagation(const TowerSystem& sys, std::int64_t horizon) {
  if (horizon < 0) throw std::invalid_argument("horizon must be nonnegative");
  return beta_curve_general(sys, horizon);
}

MixingProfile mixing_profile(const TowerSystem& sys, const std::vector<std::int64_t>& lags) {
  MixingProfile out;
  out.periodic = !sys.aperiodic();
  out.lags = lags;
  std::int64_t top = 0;
  for (auto n : lags) {
    if (n < 0) throw std::invalid_argument("lags must be nonnegative");
    top = std::max(top, n);
  }
  const auto curve = beta_curve(sys, top);
  for (auto n : lags) {
    out.beta.push_back(curve[static_cast<std::size_t>(n)]);
    out.alpha_upper.push_back(out.beta.back());
  }
  return out;
}

TowerSystem thm3_chain(const Schedule& sched) {
  if (sched.variant != Variant::Thm3) throw VariantMismatch("mixing chain needs a thm3 schedule");
  std::vector<TowerSpec> specs;
  for (std::size_t k = 0; k < sched.size(); ++k) specs.push_back({sched.height[k], sched.p[k]});
  specs.push_back({sched.remainder_height, sched.remainder_mass});
  return TowerSystem::build(std::move(specs));
}

MixingSearch search_mixing_lags(const TowerSystem& sys, const std::vector<double>& eps,
                                std::int64_t cap) {
  MixingSearch out;
  if (eps.empty()) return out;
  for (double e : eps)
    if (!(e > 0.0)) throw std::invalid_argument("mixing targets must be positive");
  std::int64_t horizon = std::max<std::int64_t>(1024, 2 * sys.max_height());
  std::vector<double> curve;
  for (;;) {
    curve = beta_curve(sys, horizon);
    out.lag.assign(eps.size(), -1);
    bool all = true;
    for (std::size_t k = 0; k < eps.size(); ++k) {
      for (std::size_t n = 0; n < curve.size(); ++n)
        if (curve[n] <= eps[k]) {
          out.lag[k] = static_cast<std::int64_t>(n);
          break;
        }
      all = all && out.lag[k] >= 0;
    }
    if (all) break;
    if (horizon >= cap)
      throw ScheduleInfeasible("beta stays above the mixing target up to lag " + std::to_string(cap));
    horizon = std::min(cap, 2 * horizon);
  }
  out.horizon = 2 * *std::max_element(out.lag.begin(), out.lag.end());
  if (out.horizon + 1 > static_cast<std::int64_t>(curve.size())) curve = beta_curve(sys, out.horizon);
  for (std::size_t k = 0; k < eps.size(); ++k) {
    double worst = 0.0;
    for (std::int64_t n = out.lag[k]; n <= out.horizon; ++n)
      worst = std::max(worst, curve[static_cast<std::size_t>(n)]);
    out.worst.push_back(worst);
    out.at_lag.push_back(curve[static_cast<std::size_t>(out.lag[k])]);
  }
  return out;
}

std::vector<ProbeResult> mixing_probes(Schedule& sched) {
  const TowerSystem sys = thm3_chain(sched);
  const MixingSearch found = search_mixing_lags(sys, sched.eps);
  sched.mixing_lag = found.lag;
  std::vector<ProbeResult> out;
  for (std::size_t k = 0; k < sched.size(); ++k) {
    ProbeResult r;
    r.name = "mixing";
    r.k = static_cast<int>(k);
    r.n = found.lag[k];
    r.value = found.worst[k];
    r.bound = bounds::mixing(sched, static_cast<int>(k));
    r.direction = Direction::AtMost;
    r.method = Method::Exact;
    r.error = 0.0;
    r.extras = {{"eps", sched.eps[k]},
                {"mixing_lag", static_cast<double>(found.lag[k])},
                {"horizon", static_cast<double>(found.horizon)},
                {"beta_at_lag", found.at_lag[k]},
                {"states", static_cast<double>(sys.state_count())}};
    r.checks = {{"aperiodic", sys.aperiodic()},
                {"lag_increasing", k == 0 || found.lag[k] >= found.lag[k - 1]}};
    r.decide();
    out.push_back(r);
  }
  return out;
}

}  // namespace mdsllt
