#include "mdsllt/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "mdsllt/errors.hpp"

namespace mdsllt {

namespace fs = std::filesystem;
using nlohmann::json;

Schedule make_schedule(const ExperimentConfig& cfg) {
  ScheduleOptions so;
  so.search_cap = cfg.budgets.search_cap;
  so.tail_reserve = cfg.tail_reserve;
  so.eps0 = cfg.eps0;
  const RateSequence a = cfg.rate.make();
  switch (cfg.variant) {
    case Variant::Thm1: return derive_schedule_thm1(a, cfg.K, so);
    case Variant::Thm2: return derive_schedule_thm2(a, cfg.L1, cfg.L2, cfg.L, cfg.K, so);
    case Variant::Thm3: return derive_schedule_thm3(a, cfg.K, so);
    case Variant::Iid: break;
  }
  Schedule s;
  s.variant = Variant::Iid;
  s.rate = a.descriptor();
  return s;
}

ProcessModel make_model(const ExperimentConfig& cfg, const Schedule& sched) {
  switch (cfg.variant) {
    case Variant::Thm2: return build_counterexample(sched, NoiseSpec::two_interval());
    case Variant::Iid: return make_iid_model(NoiseSpec::lattice(cfg.noise_a));
    default: return build_counterexample(sched, NoiseSpec::lattice(cfg.noise_a));
  }
}

ModelSummary summarize(const ProcessModel& model) {
  ModelSummary s;
  s.states = model.system.state_count();
  s.towers = model.system.towers();
  s.mu_A = model.mu_A;
  s.sigma2 = model.sigma2;
  s.block_measure = model.block_measure;
  s.intersection = model.intersection;
  return s;
}

std::size_t expected_probe_count(Variant v, int K) {
  const auto k = static_cast<std::size_t>(K);
  switch (v) {
    case Variant::Thm1: return 2 * k + 2;
    case Variant::Thm3: return 3 * k + 2;
    case Variant::Thm2: return 2 * (k / 2) + 3;
    case Variant::Iid: return 8;
  }
  return 0;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

constexpr std::uint64_t kMdsSeedOffset = 0x100;
constexpr std::uint64_t kControlSeedOffset = 0x200;
constexpr std::int64_t kIidWindows[] = {25, 100, 400};

struct IidLattice {
  double b, h;
};

// Maximal lattice of the single-step law of the lattice noise.
IidLattice maximal_lattice(double a) { return a == 1.0 ? IidLattice{-1.0, 2.0} : IidLattice{0.0, 1.0}; }

double iid_clt_bound(std::int64_t n) { return 0.8 / std::sqrt(static_cast<double>(n)); }

ProbeResult mds_probe(const ProcessModel& model, const ExperimentConfig& cfg, const ProbeOptions& po) {
  MdsOptions mo;
  mo.exact_budget = cfg.budgets.exact_ops;
  ProbeResult r = mds_conditional_mean_test(model, cfg.mds_window, cfg.budgets.mc_reps,
                                            po.seed + kMdsSeedOffset, mo);
  if (cfg.budgets.mc_reps > 0) {
    MdsOptions mc;
    mc.force_monte_carlo = true;
    const ProbeResult own =
        mds_conditional_mean_test(model, 3, cfg.budgets.mc_reps, po.seed + kMdsSeedOffset, mc);
    mc.filter = 0.5;
    const ProbeResult control =
        mds_conditional_mean_test(model, 3, cfg.budgets.mc_reps, po.seed + kControlSeedOffset, mc);
    r.extras.push_back({"monte_carlo_stat", own.value});
    r.extras.push_back({"control_stat", control.value});
    r.checks.push_back({"monte_carlo_passes", own.pass});
    r.checks.push_back({"control_rejected", !control.pass});
    r.decide();
  }
  return r;
}

std::vector<ProbeResult> iid_probes(const ProcessModel& model, const ExperimentConfig& cfg,
                                    const ProbeOptions& po) {
  std::vector<ProbeResult> out;
  for (std::int64_t n : kIidWindows) out.push_back(clt_probe(model, n, iid_clt_bound(n), po));

  const LatticeDistribution step = symmetric_step_sum(cfg.noise_a, 1);
  const IidLattice lat = maximal_lattice(cfg.noise_a);
  std::vector<double> gmax, ghalf;
  for (std::int64_t n : {100, 200, 400}) {
    gmax.push_back(gnedenko_baseline(step, lat.b, lat.h, n));
    ghalf.push_back(gnedenko_baseline(step, lat.b, lat.h / 2.0, n));
  }
  ProbeResult g;
  g.name = "gnedenko_maximal";
  g.n = 400;
  g.value = gmax[2];
  g.bound = gmax[0];
  g.direction = Direction::AtMost;
  g.extras = {{"h", lat.h}, {"g100", gmax[0]}, {"g200", gmax[1]}, {"g400", gmax[2]}};
  g.checks = {{"decreasing", gmax[2] < gmax[1] && gmax[1] < gmax[0]}};
  g.decide();
  out.push_back(g);

  ProbeResult gh;
  gh.name = "gnedenko_nonmaximal";
  gh.n = 400;
  gh.value = *std::min_element(ghalf.begin(), ghalf.end());
  gh.bound = 0.1;
  gh.direction = Direction::AtLeast;
  gh.extras = {{"h", lat.h / 2.0}, {"g100", ghalf[0]}, {"g200", ghalf[1]}, {"g400", ghalf[2]}};
  gh.decide();
  out.push_back(gh);

  out.push_back(mds_probe(model, cfg, po));
  out.push_back(variance_probe(model));

  ProbeResult vf;
  vf.name = "variance_floor";
  vf.n = 1;
  vf.value = conditional_variance_floor(model, 1);
  vf.bound = 0.0;
  vf.direction = Direction::AtLeast;
  vf.error = 1e-12;
  vf.decide();
  out.push_back(vf);
  return out;
}

std::vector<std::int64_t> profile_lags(const Schedule& sched) {
  std::vector<std::int64_t> lags{0};
  std::int64_t horizon = 0;
  for (auto m : sched.mixing_lag) horizon = std::max(horizon, 2 * m);
  for (std::int64_t n = 1; n <= horizon; n *= 2) lags.push_back(n);
  for (auto m : sched.mixing_lag) lags.push_back(m);
  lags.push_back(horizon);
  std::sort(lags.begin(), lags.end());
  lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
  return lags;
}

void add_curves(ReportBundle& b) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const ProbeResult* llt = nullptr;
  for (const auto& p : b.probes) {
    if (p.name == "llt" || p.name == "llt_density") llt = &p;
    if (p.name != "clt") continue;
    CurvePoint c;
    c.k = p.k;
    c.n = p.n;
    c.clt_value = p.value;
    c.clt_bound = p.bound;
    c.method = to_string(p.method);
    if (llt && llt->k == p.k && llt->n == p.n) {
      c.llt_value = llt->value;
      c.llt_bound = llt->bound;
    } else {
      c.llt_value = nan;
      c.llt_bound = nan;
    }
    b.curves.push_back(c);
  }
}

}  // namespace

ReportBundle run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  if (!cfg.seed) throw ConfigError("a seed is required to run probes");
  ReportBundle b;
  b.config = cfg;
  b.timestamp = utc_timestamp();
  ProbeOptions po;
  po.seed = *cfg.seed;
  po.mc_reps = cfg.budgets.mc_reps;
  po.workers = cfg.workers ? cfg.workers : default_workers();
  po.occupancy.op_budget = cfg.budgets.exact_ops;

  b.schedule = make_schedule(cfg);
  const ProcessModel model = make_model(cfg, b.schedule);
  b.model = summarize(model);
  Schedule& s = b.schedule;
  const int K = static_cast<int>(s.size());

  switch (cfg.variant) {
    case Variant::Thm1:
    case Variant::Thm3:
      for (int k = 0; k < K; ++k) {
        b.probes.push_back(llt_probe_lattice(model, s, k, po));
        b.probes.push_back(clt_probe(model, s, k, po));
      }
      b.probes.push_back(mds_probe(model, cfg, po));
      b.probes.push_back(variance_probe(model, &s));
      if (cfg.variant == Variant::Thm3) {
        for (auto& r : mixing_probes(s)) b.probes.push_back(r);
        b.mixing = mixing_profile(thm3_chain(s), profile_lags(s));
      }
      break;
    case Variant::Thm2:
      for (int k = 1; k < K; k += 2) {
        b.probes.push_back(llt_probe_density(model, s, k, po));
        b.probes.push_back(clt_probe(model, s, k, po));
      }
      b.probes.push_back(density_bound_probe(model, s));
      b.probes.push_back(variance_probe(model, &s));
      b.probes.push_back(mds_probe(model, cfg, po));
      break;
    case Variant::Iid:
      b.probes = iid_probes(model, cfg, po);
      for (std::int64_t n : kIidWindows) {
        CurvePoint c;
        c.n = n;
        c.llt_value = lattice_sum_distribution(model, n).at(0);
        c.llt_bound = std::numeric_limits<double>::quiet_NaN();
        c.method = "exact";
        for (const auto& p : b.probes)
          if (p.name == "clt" && p.n == n) c.clt_value = p.value, c.clt_bound = p.bound;
        b.curves.push_back(c);
      }
      break;
  }
  if (cfg.variant != Variant::Iid) add_curves(b);
  if (b.probes.size() != expected_probe_count(cfg.variant, cfg.K))
    throw std::logic_error("probe count does not match the variant's formula");
  b.pass = std::all_of(b.probes.begin(), b.probes.end(), [](const ProbeResult& p) { return p.pass; });
  return b;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string num(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string quote(const std::string& s) { return json(s).dump(); }

// One flat JSON object with fields in insertion order.
class Record {
 public:
  explicit Record(const std::string& type) { body_ = "{\"record\":" + quote(type); }
  Record& f(const std::string& key, double v) { return raw(key, num(v)); }
  Record& i(const std::string& key, std::int64_t v) { return raw(key, std::to_string(v)); }
  Record& s(const std::string& key, const std::string& v) { return raw(key, quote(v)); }
  Record& b(const std::string& key, bool v) { return raw(key, v ? "true" : "false"); }
  Record& raw(const std::string& key, const std::string& v) {
    body_ += "," + quote(key) + ":" + v;
    return *this;
  }
  std::string line() const { return body_ + "}\n"; }

 private:
  std::string body_;
};

template <class T>
std::string array_of(const std::vector<T>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, std::string>)
      out += quote(v[i]);
    else if constexpr (std::is_integral_v<T>)
      out += std::to_string(v[i]);
    else
      out += num(v[i]);
  }
  return out + "]";
}

template <class V>
double at_or_nan(const std::vector<V>& v, std::size_t k) {
  return k < v.size() ? static_cast<double>(v[k]) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string to_ndjson(const ReportBundle& b) {
  const auto& c = b.config;
  const auto& s = b.schedule;
  std::string out;
  out += Record("provenance")
             .i("schema_version", c.schema_version)
             .s("tool_version", kToolVersion)
             .s("variant", to_string(c.variant))
             .s("rate", s.rate)
             .i("K", c.K)
             .f("noise_a", c.noise_a)
             .f("L1", c.L1)
             .f("L2", c.L2)
             .f("L", c.L)
             .i("seed", static_cast<std::int64_t>(c.seed.value_or(0)))
             .f("exact_ops", c.budgets.exact_ops)
             .i("mc_reps", static_cast<std::int64_t>(c.budgets.mc_reps))
             .i("search_cap", c.budgets.search_cap)
             .f("tail_reserve", c.tail_reserve)
             .f("eps0", c.eps0)
             .i("mds_window", c.mds_window)
             .s("timestamp", b.timestamp)
             .line();
  for (std::size_t k = 0; k < s.size(); ++k) {
    out += Record("schedule_entry")
               .i("k", static_cast<std::int64_t>(k))
               .i("n", s.n[k])
               .f("a_n", s.a_n[k])
               .i("height", s.height[k])
               .f("d", at_or_nan(s.d, k))
               .f("p", at_or_nan(s.p, k))
               .f("rho", at_or_nan(s.rho, k))
               .f("eps", at_or_nan(s.eps, k))
               .f("delta", at_or_nan(s.delta, k))
               .f("mixing_lag", at_or_nan(s.mixing_lag, k))
               .line();
  }
  out += Record("schedule")
             .i("remainder_height", s.remainder_height)
             .f("remainder_mass", s.remainder_mass)
             .f("remainder_weight", s.remainder_weight)
             .f("c1", s.c1)
             .f("c2", s.c2)
             .f("c1_full", s.c1_full)
             .f("c2_full", s.c2_full)
             .f("sigma2", s.sigma2)
             .f("sigma2_closed_form", s.sigma2_closed_form)
             .f("truncation_remainder", s.truncation_remainder)
             .raw("warnings", array_of(s.warnings))
             .line();
  std::vector<std::int64_t> heights;
  std::vector<double> masses;
  for (const auto& t : b.model.towers) {
    heights.push_back(t.height);
    masses.push_back(t.mass);
  }
  out += Record("model")
             .i("states", static_cast<std::int64_t>(b.model.states))
             .raw("heights", array_of(heights))
             .raw("masses", array_of(masses))
             .f("mu_A", b.model.mu_A)
             .f("sigma2", b.model.sigma2)
             .raw("block_measure", array_of(b.model.block_measure))
             .raw("intersection", array_of(b.model.intersection))
             .line();
  for (std::size_t i = 0; i < b.probes.size(); ++i) {
    const auto& p = b.probes[i];
    std::string extras = "{", checks = "{";
    for (std::size_t j = 0; j < p.extras.size(); ++j)
      extras += (j ? "," : "") + quote(p.extras[j].first) + ":" + num(p.extras[j].second);
    for (std::size_t j = 0; j < p.checks.size(); ++j)
      checks += (j ? "," : "") + quote(p.checks[j].first) + ":" + (p.checks[j].second ? "true" : "false");
    out += Record("probe")
               .i("index", static_cast<std::int64_t>(i))
               .s("name", p.name)
               .i("k", p.k)
               .i("n", p.n)
               .f("value", p.value)
               .f("bound", p.bound)
               .s("direction", to_string(p.direction))
               .s("method", to_string(p.method))
               .f("error", p.error)
               .f("tolerance", p.tolerance)
               .b("pass", p.pass)
               .raw("extras", extras + "}")
               .raw("checks", checks + "}")
               .line();
  }
  if (b.mixing) {
    for (std::size_t i = 0; i < b.mixing->lags.size(); ++i)
      out += Record("mixing")
                 .i("lag", b.mixing->lags[i])
                 .f("beta", b.mixing->beta[i])
                 .f("alpha_upper", b.mixing->alpha_upper[i])
                 .b("periodic", b.mixing->periodic)
                 .line();
  }
  const auto passed = std::count_if(b.probes.begin(), b.probes.end(), [](const auto& p) { return p.pass; });
  out += Record("summary")
             .i("probes", static_cast<std::int64_t>(b.probes.size()))
             .i("passed", passed)
             .b("pass", b.pass)
             .line();
  return out;
}

std::string to_text(const ReportBundle& b) {
  std::ostringstream os;
  char buf[512];
  const auto& s = b.schedule;
  os << "variant   " << to_string(b.config.variant) << "\n";
  os << "rate      " << s.rate << "\n";
  os << "seed      " << b.config.seed.value_or(0) << "\n";
  os << "generated " << b.timestamp << "\n\n";
  if (s.size() > 0) {
    os << "schedule\n";
    std::snprintf(buf, sizeof buf, "  %3s %9s %12s %10s %12s %12s %10s %10s\n", "k", "n", "a_n", "H", "d",
                  "p", "rho", "eps");
    os << buf;
    for (std::size_t k = 0; k < s.size(); ++k) {
      std::snprintf(buf, sizeof buf, "  %3zu %9lld %12.6g %10lld %12.6g %12.6g %10.4g %10.4g\n", k,
                    static_cast<long long>(s.n[k]), s.a_n[k], static_cast<long long>(s.height[k]),
                    at_or_nan(s.d, k), at_or_nan(s.p, k), at_or_nan(s.rho, k), at_or_nan(s.eps, k));
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "  remainder: height %lld, mass %.6g, weight %.6g\n",
                  static_cast<long long>(s.remainder_height), s.remainder_mass, s.remainder_weight);
    os << buf;
    for (const auto& w : s.warnings) os << "  warning: " << w << "\n";
    os << "\n";
  }
  std::snprintf(buf, sizeof buf, "model: %zu states in %zu towers, mu(A) = %.6g, sigma^2 = %.10g\n\n",
                b.model.states, b.model.towers.size(), b.model.mu_A, b.model.sigma2);
  os << buf;
  std::snprintf(buf, sizeof buf, "  %-20s %3s %8s %16s %2s %16s %-11s %10s  %s\n", "probe", "k", "n",
                "value", "", "bound", "method", "error", "result");
  os << buf;
  for (const auto& p : b.probes) {
    std::snprintf(buf, sizeof buf, "  %-20s %3d %8lld %16.10g %2s %16.10g %-11s %10.3g  %s\n",
                  p.name.c_str(), p.k, static_cast<long long>(p.n), p.value,
                  to_string(p.direction).c_str(), p.bound, to_string(p.method).c_str(), p.error,
                  p.pass ? "PASS" : "FAIL");
    os << buf;
    for (const auto& [name, ok] : p.checks)
      if (!ok) os << "      failed check: " << name << "\n";
  }
  if (b.mixing) {
    os << "\nmixing profile (beta = alpha upper bound)" << (b.mixing->periodic ? " [periodic]" : "")
       << "\n";
    for (std::size_t i = 0; i < b.mixing->lags.size(); ++i) {
      std::snprintf(buf, sizeof buf, "  n = %9lld  beta = %.6g\n",
                    static_cast<long long>(b.mixing->lags[i]), b.mixing->beta[i]);
      os << buf;
    }
  }
  const auto passed = std::count_if(b.probes.begin(), b.probes.end(), [](const auto& p) { return p.pass; });
  os << "\n" << passed << "/" << b.probes.size() << " probes pass: " << (b.pass ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::string to_csv(const ReportBundle& b) {
  std::string out = "variant,k,n,llt_value,llt_bound,clt_value,clt_bound,method\n";
  auto cell = [](double x) { return std::isfinite(x) ? num(x) : std::string(); };
  for (const auto& c : b.curves) {
    out += to_string(b.config.variant) + "," + std::to_string(c.k) + "," + std::to_string(c.n) + "," +
           cell(c.llt_value) + "," + cell(c.llt_bound) + "," + cell(c.clt_value) + "," +
           cell(c.clt_bound) + "," + c.method + "\n";
  }
  return out;
}

void write_atomically(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  fs::rename(tmp, path);
}

void write_report(const ReportBundle& bundle, const std::string& dir) {
  fs::create_directories(dir);
  write_atomically((fs::path(dir) / "report.ndjson").string(), to_ndjson(bundle));
  write_atomically((fs::path(dir) / "report.txt").string(), to_text(bundle));
  write_atomically((fs::path(dir) / "curves.csv").string(), to_csv(bundle));
}

// ---------------------------------------------------------------------------
// Certificate verification

namespace {

double get_number(const json& rec, const char* key, const std::string& where) {
  if (!rec.contains(key)) throw ParseError(where + " lacks field '" + key + "'");
  const auto& v = rec.at(key);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) throw ParseError(where + ": field '" + key + "' is not a number");
  return v.get<double>();
}

std::string describe(const ProbeResult& p, std::size_t index) {
  return "probe #" + std::to_string(index) + " (" + p.name + (p.k >= 0 ? ", k = " + std::to_string(p.k) : "") +
         ")";
}

void expect_equal(double recorded, double expected, const std::string& what) {
  if (!(recorded == expected))
    throw BoundMismatch(what + ": recorded " + num(recorded) + ", recomputed " + num(expected));
}

}  // namespace

VerifyResult verify_certificate_text(const std::string& text) {
  std::vector<json> records;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid record: ") + e.what());
    }
    if (!records.back().is_object() || !records.back().contains("record"))
      throw ParseError("line without a record type");
  }
  if (records.empty()) throw ParseError("empty bundle");

  const json* prov = nullptr;
  const json* summary = nullptr;
  Schedule s;
  std::vector<std::pair<ProbeResult, std::size_t>> probes;
  try {
    for (const auto& r : records) {
      const std::string type = r.at("record").get<std::string>();
      if (type == "provenance") {
        prov = &r;
      } else if (type == "summary") {
        summary = &r;
      } else if (type == "schedule_entry") {
        const std::string where = "schedule_entry";
        s.n.push_back(static_cast<std::int64_t>(get_number(r, "n", where)));
        s.a_n.push_back(get_number(r, "a_n", where));
        s.height.push_back(static_cast<std::int64_t>(get_number(r, "height", where)));
        s.d.push_back(get_number(r, "d", where));
        s.p.push_back(get_number(r, "p", where));
        s.rho.push_back(get_number(r, "rho", where));
        s.eps.push_back(get_number(r, "eps", where));
      } else if (type == "probe") {
        ProbeResult p;
        const std::string where = "probe";
        p.name = r.at("name").get<std::string>();
        p.k = r.at("k").get<int>();
        p.n = r.at("n").get<std::int64_t>();
        p.value = get_number(r, "value", where);
        p.bound = get_number(r, "bound", where);
        p.direction = r.at("direction").get<std::string>() == ">=" ? Direction::AtLeast : Direction::AtMost;
        const std::string method = r.at("method").get<std::string>();
        p.method = method == "exact" ? Method::Exact : method == "grid" ? Method::Grid : Method::MonteCarlo;
        p.error = get_number(r, "error", where);
        p.tolerance = get_number(r, "tolerance", where);
        p.pass = r.at("pass").get<bool>();
        for (const auto& [key, v] : r.at("extras").items())
          p.extras.push_back({key, v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>()});
        for (const auto& [key, v] : r.at("checks").items()) p.checks.push_back({key, v.get<bool>()});
        probes.push_back({p, r.at("index").get<std::size_t>()});
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed record: ") + e.what());
  }
  if (!prov) throw ParseError("bundle has no provenance record");
  if (!summary) throw ParseError("bundle has no summary record");

  Variant variant;
  RateSequence rate = RateSequence::constant(1.0);
  int K = 0;
  try {
    variant = variant_from_string(prov->at("variant").get<std::string>());
    rate = rate_from_descriptor(prov->at("rate").get<std::string>());
    K = prov->at("K").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed provenance: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  s.variant = variant;
  s.L1 = get_number(*prov, "L1", "provenance");
  s.L2 = get_number(*prov, "L2", "provenance");
  s.L = get_number(*prov, "L", "provenance");

  for (std::size_t k = 0; k < s.size(); ++k)
    expect_equal(s.a_n[k], rate(s.n[k]), "schedule entry k = " + std::to_string(k) + " a_n");

  if (probes.size() != expected_probe_count(variant, K))
    throw BoundMismatch("bundle has " + std::to_string(probes.size()) + " probes, expected " +
                        std::to_string(expected_probe_count(variant, K)));

  bool all = true;
  for (const auto& [p, index] : probes) {
    const std::string who = describe(p, index);
    auto need_k = [&] {
      if (p.k < 0 || static_cast<std::size_t>(p.k) >= s.size()) throw BoundMismatch(who + ": index outside schedule");
      if (p.n != s.n[static_cast<std::size_t>(p.k)]) throw BoundMismatch(who + ": n differs from schedule");
    };
    double expected = 0.0;
    const bool lattice = variant == Variant::Thm1 || variant == Variant::Thm3;
    if (p.name == "llt" && lattice) {
      need_k();
      expected = bounds::llt(s, p.k);
      const double mid = variant == Variant::Thm1 ? bounds::thm1_intermediate(s, p.k)
                                                  : bounds::thm3_intermediate(s, p.k);
      if (!p.has_extra("intermediate_bound")) throw BoundMismatch(who + ": intermediate bound missing");
      expect_equal(p.extra("intermediate_bound"), mid, who + " intermediate bound");
    } else if (p.name == "clt" && lattice) {
      need_k();
      expected = bounds::clt_lattice(s, p.k);
    } else if (p.name == "clt" && variant == Variant::Thm2) {
      need_k();
      expected = bounds::llt(s, p.k);
    } else if (p.name == "clt" && variant == Variant::Iid) {
      expected = iid_clt_bound(p.n);
    } else if (p.name == "llt_density") {
      need_k();
      expected = bounds::ratio(s);
    } else if (p.name == "density_bound") {
      expected = bounds::density(s);
    } else if (p.name == "mixing") {
      if (p.k < 0 || static_cast<std::size_t>(p.k) >= s.size()) throw BoundMismatch(who + ": index outside schedule");
      expected = bounds::mixing(s, p.k);
    } else if (p.name == "variance") {
      expected = 1e-12;
    } else if (p.name == "mds") {
      expected = p.method == Method::Exact ? 1e-12 : 4.0;
    } else if (p.name == "gnedenko_maximal") {
      expected = p.extra("g100");
    } else if (p.name == "gnedenko_nonmaximal") {
      expected = 0.1;
    } else if (p.name == "variance_floor") {
      expected = 0.0;
    } else {
      throw BoundMismatch(who + ": unknown probe for variant " + to_string(variant));
    }
    expect_equal(p.bound, expected, who + " bound");
    ProbeResult again = p;
    again.decide();
    if (again.pass != p.pass) throw BoundMismatch(who + ": pass flag does not follow from its fields");
    all = all && p.pass;
  }
  bool recorded = false;
  try {
    recorded = summary->at("pass").get<bool>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed summary: ") + e.what());
  }
  if (recorded != all) throw BoundMismatch("summary pass flag disagrees with the probes");
  return {probes.size(), all};
}

VerifyResult verify_certificate(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return verify_certificate_text(ss.str());
}

}  // namespace mdsllt
