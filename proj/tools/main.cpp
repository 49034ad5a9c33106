// mdsllt: schedules, models, probes and certified reports for the tower
// counterexamples.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mdsllt/errors.hpp"
#include "mdsllt/report.hpp"

using namespace mdsllt;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitProbeFailure = 1;
constexpr int kExitConfigError = 2;

// Flags that mirror ExperimentConfig. Unset flags leave the config (or the
// defaults) untouched.
struct Overrides {
  std::string config_path;
  std::optional<std::string> variant, rate_family, output_dir;
  std::optional<double> rate_c, rate_beta, noise_a, L1, L2, L, exact_ops, tail_reserve, eps0;
  std::optional<int> K, mds_window;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> mc_reps;
  std::optional<std::int64_t> search_cap;
  unsigned workers = 0;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--variant", variant, "thm1 | thm2 | thm3 | iid-baseline");
    app->add_option("--K", K, "number of scheduled blocks");
    app->add_option("--rate-family", rate_family, "power | log | constant");
    app->add_option("--rate-c", rate_c, "rate constant c");
    app->add_option("--rate-beta", rate_beta, "power-law exponent");
    app->add_option("--noise-a", noise_a, "lattice noise P(g = +-1) = a/2");
    app->add_option("--L1", L1, "density constant L1");
    app->add_option("--L2", L2, "density constant L2");
    app->add_option("--L", L, "ratio target L");
    app->add_option("--seed", seed, "Monte Carlo seed");
    app->add_option("--exact-ops", exact_ops, "budget for exact computations");
    app->add_option("--mc-reps", mc_reps, "Monte Carlo replications");
    app->add_option("--search-cap", search_cap, "largest n tried by schedule searches");
    app->add_option("--tail-reserve", tail_reserve, "mass kept for the remainder tower (thm3)");
    app->add_option("--eps0", eps0, "first mixing target (thm3)");
    app->add_option("--mds-window", mds_window, "window of the exact MDS test");
    app->add_option("-o,--output-dir", output_dir, "report directory");
    app->add_option("--workers", workers, "Monte Carlo threads (0 = all cores)");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (variant) {
      try {
        c.variant = variant_from_string(*variant);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    if (K) c.K = *K;
    if (rate_family) c.rate.family = *rate_family;
    if (rate_c) c.rate.c = *rate_c;
    if (rate_beta) c.rate.beta = *rate_beta;
    if (noise_a) c.noise_a = *noise_a;
    if (L1) c.L1 = *L1;
    if (L2) c.L2 = *L2;
    if (L) c.L = *L;
    if (seed) c.seed = *seed;
    if (exact_ops) c.budgets.exact_ops = *exact_ops;
    if (mc_reps) c.budgets.mc_reps = *mc_reps;
    if (search_cap) c.budgets.search_cap = *search_cap;
    if (tail_reserve) c.tail_reserve = *tail_reserve;
    if (eps0) c.eps0 = *eps0;
    if (mds_window) c.mds_window = *mds_window;
    if (output_dir) c.output_dir = *output_dir;
    c.workers = workers;
    validate(c);
    return c;
  }
};

void print_schedule(const Schedule& s) {
  std::printf("variant %s, rate %s\n", to_string(s.variant).c_str(), s.rate.c_str());
  std::printf("%3s %9s %14s %10s %14s %14s %12s %12s %10s\n", "k", "n", "a_n", "H", "d", "p", "rho", "eps",
              "m_k");
  auto get = [](const std::vector<double>& v, std::size_t k) { return k < v.size() ? v[k] : 0.0; };
  for (std::size_t k = 0; k < s.size(); ++k) {
    const long long m = k < s.mixing_lag.size() ? static_cast<long long>(s.mixing_lag[k]) : -1;
    std::printf("%3zu %9lld %14.8g %10lld %14.8g %14.8g %12.6g %12.6g %10lld\n", k,
                static_cast<long long>(s.n[k]), s.a_n[k], static_cast<long long>(s.height[k]), get(s.d, k),
                get(s.p, k), get(s.rho, k), get(s.eps, k), m);
  }
  std::printf("remainder: height %lld, mass %.10g, weight %.10g\n", static_cast<long long>(s.remainder_height),
              s.remainder_mass, s.remainder_weight);
  if (s.variant == Variant::Thm2)
    std::printf("sigma^2 = %.12g, closed form %.12g, truncation remainder %.3g\n", s.sigma2,
                s.sigma2_closed_form, s.truncation_remainder);
  for (const auto& w : s.warnings) std::printf("warning: %s\n", w.c_str());
}

void print_probe(const ProbeResult& p) {
  std::printf("%-20s k=%-3d n=%-8lld value=%-22.17g %s bound=%-22.17g method=%-11s error=%.3g  %s\n",
              p.name.c_str(), p.k, static_cast<long long>(p.n), p.value, to_string(p.direction).c_str(),
              p.bound, to_string(p.method).c_str(), p.error, p.pass ? "PASS" : "FAIL");
  for (const auto& [key, v] : p.extras) std::printf("    %-22s %.17g\n", key.c_str(), v);
  for (const auto& [key, ok] : p.checks) std::printf("    %-22s %s\n", key.c_str(), ok ? "ok" : "FAILED");
}

int cmd_schedule(const Overrides& o, bool with_mixing) {
  const ExperimentConfig cfg = o.resolve();
  Schedule s = make_schedule(cfg);
  if (with_mixing && s.variant == Variant::Thm3) mixing_probes(s);
  print_schedule(s);
  return kExitPass;
}

int cmd_build(const Overrides& o) {
  const ExperimentConfig cfg = o.resolve();
  const Schedule s = make_schedule(cfg);
  const ModelSummary m = summarize(make_model(cfg, s));
  std::printf("states %zu, towers %zu, mu(A) = %.17g, sigma^2 = %.17g\n", m.states, m.towers.size(), m.mu_A,
              m.sigma2);
  for (std::size_t t = 0; t < m.towers.size(); ++t)
    std::printf("  tower %zu: height %lld, level mass %.17g, total %.17g\n", t,
                static_cast<long long>(m.towers[t].height), m.towers[t].mass,
                m.towers[t].mass * static_cast<double>(m.towers[t].height));
  for (std::size_t k = 0; k < m.block_measure.size(); ++k)
    std::printf("  block %zu: measure %.17g, window intersection %.17g\n", k, m.block_measure[k],
                k < m.intersection.size() ? m.intersection[k] : 0.0);
  return kExitPass;
}

int cmd_probe(const Overrides& o, const std::string& which, int k) {
  const ExperimentConfig cfg = o.resolve();
  if (!cfg.seed) throw ConfigError("--seed is required for probes");
  Schedule s = make_schedule(cfg);
  const ProcessModel model = make_model(cfg, s);
  ProbeOptions po;
  po.seed = *cfg.seed;
  po.mc_reps = cfg.budgets.mc_reps;
  po.workers = cfg.workers ? cfg.workers : default_workers();
  po.occupancy.op_budget = cfg.budgets.exact_ops;

  std::vector<ProbeResult> out;
  auto each_k = [&](auto&& fn) {
    if (k >= 0) {
      if (static_cast<std::size_t>(k) >= s.size()) throw ConfigError("--k outside the schedule");
      out.push_back(fn(k));
    } else {
      for (int j = 0; j < static_cast<int>(s.size()); ++j)
        if (cfg.variant != Variant::Thm2 || j % 2 == 1) out.push_back(fn(j));
    }
  };
  if (which == "llt") {
    if (cfg.variant == Variant::Thm2)
      each_k([&](int j) { return llt_probe_density(model, s, j, po); });
    else
      each_k([&](int j) { return llt_probe_lattice(model, s, j, po); });
  } else if (which == "clt") {
    each_k([&](int j) { return clt_probe(model, s, j, po); });
  } else if (which == "mds") {
    MdsOptions mo;
    mo.exact_budget = cfg.budgets.exact_ops;
    out.push_back(mds_conditional_mean_test(model, cfg.mds_window, cfg.budgets.mc_reps, po.seed, mo));
  } else if (which == "variance") {
    out.push_back(variance_probe(model, &s));
  } else if (which == "density") {
    out.push_back(density_bound_probe(model, s));
  } else if (which == "mixing") {
    for (auto& r : mixing_probes(s))
      if (k < 0 || r.k == k) out.push_back(r);
  }
  bool all = true;
  for (const auto& p : out) {
    print_probe(p);
    all = all && p.pass;
  }
  return all ? kExitPass : kExitProbeFailure;
}

int cmd_report(const Overrides& o, bool quiet) {
  const ExperimentConfig cfg = o.resolve();
  const ReportBundle b = run_experiment(cfg);
  write_report(b, cfg.output_dir);
  if (!quiet) std::cout << to_text(b);
  std::printf("report written to %s\n", cfg.output_dir.c_str());
  return b.pass ? kExitPass : kExitProbeFailure;
}

int cmd_verify(const std::string& path) {
  const VerifyResult r = verify_certificate(path);
  std::printf("%zu probes, bounds recomputed and consistent; recorded result %s\n", r.probes,
              r.pass ? "PASS" : "FAIL");
  return r.pass ? kExitPass : kExitProbeFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tower counterexamples to the local limit theorem for martingale differences"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Overrides schedule_o, build_o, probe_o, report_o;
  bool with_mixing = false, quiet = false;
  std::string which = "llt", bundle;
  int k = -1;

  auto* sched = app.add_subcommand("schedule", "derive and print the block schedule");
  schedule_o.attach(sched);
  sched->add_flag("--mixing", with_mixing, "also search the mixing lags (thm3)");

  auto* build = app.add_subcommand("build", "build the tower model and print its summary");
  build_o.attach(build);

  auto* probe = app.add_subcommand("probe", "run one family of probes");
  probe_o.attach(probe);
  probe->add_option("--probe", which, "llt | clt | mds | variance | density | mixing")
      ->check(CLI::IsMember({"llt", "clt", "mds", "variance", "density", "mixing"}));
  probe->add_option("--k", k, "schedule index (default: all)");

  auto* report = app.add_subcommand("report", "run every probe and write report files");
  report_o.attach(report);
  report->add_flag("-q,--quiet", quiet, "do not print the text report");

  auto* verify = app.add_subcommand("verify", "recompute the bounds recorded in a report.ndjson");
  verify->add_option("bundle", bundle, "path to report.ndjson")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfigError;
  }

  try {
    if (*sched) return cmd_schedule(schedule_o, with_mixing);
    if (*build) return cmd_build(build_o);
    if (*probe) return cmd_probe(probe_o, which, k);
    if (*report) return cmd_report(report_o, quiet);
    if (*verify) return cmd_verify(bundle);
  } catch (const BoundMismatch& e) {
    std::fprintf(stderr, "bound mismatch: %s\n", e.what());
    return kExitProbeFailure;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  }
  return kExitConfigError;
}
