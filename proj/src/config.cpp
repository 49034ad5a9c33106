#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mdsllt/errors.hpp"
#include "mdsllt/report.hpp"

namespace mdsllt {

using nlohmann::json;

RateSequence RateConfig::make() const {
  if (family == "power") return RateSequence::power_law(c, beta);
  if (family == "log") return RateSequence::logarithmic(c);
  if (family == "constant") return RateSequence::constant(c);
  throw ConfigError("unknown rate family '" + family + "'");
}

RateSequence rate_from_descriptor(const std::string& descriptor) {
  const auto colon = descriptor.find(':');
  if (colon == std::string::npos) throw ParseError("bad rate descriptor '" + descriptor + "'");
  const std::string family = descriptor.substr(0, colon);
  std::vector<double> args;
  std::stringstream ss(descriptor.substr(colon + 1));
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      args.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParseError("bad number in rate descriptor '" + descriptor + "'");
    }
  }
  if (family == "power" && args.size() == 2) return RateSequence::power_law(args[0], args[1]);
  if (family == "log" && args.size() == 1) return RateSequence::logarithmic(args[0]);
  if (family == "constant" && args.size() == 1) return RateSequence::constant(args[0]);
  throw ParseError("unknown rate descriptor '" + descriptor + "'");
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown field '" + key + "' in " + where);
}

template <class T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

// Integers may be written as 1e7 in JSON; accept integral doubles.
void read_int64(const json& obj, const char* key, std::int64_t& out, const std::string& where) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  if (v.is_number_integer()) {
    out = v.get<std::int64_t>();
  } else if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>() &&
             std::abs(v.get<double>()) < 9e18) {
    out = static_cast<std::int64_t>(v.get<double>());
  } else {
    throw ConfigError("field '" + std::string(key) + "' in " + where + " must be an integer");
  }
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  if (cfg.schema_version != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(cfg.schema_version));
  const int min_k = (cfg.variant == Variant::Thm2 || cfg.variant == Variant::Thm3) ? 2 : 1;
  if (cfg.K < min_k) throw ConfigError("K must be at least " + std::to_string(min_k));
  if (cfg.K > 40) throw ConfigError("K must be at most 40");
  if (cfg.rate.family != "power" && cfg.rate.family != "log" && cfg.rate.family != "constant")
    throw ConfigError("unknown rate family '" + cfg.rate.family + "'");
  if (!(cfg.rate.c > 0.0)) throw ConfigError("rate.c must be positive");
  if (cfg.rate.family == "power" && !(cfg.rate.beta > 0.0)) throw ConfigError("rate.beta must be positive");
  if (!(cfg.noise_a > 0.0 && cfg.noise_a <= 1.0)) throw ConfigError("noise_a must lie in (0, 1]");
  if (!(cfg.L1 > 0.0) || !(cfg.L2 > 0.0) || !(cfg.L > 0.0))
    throw ConfigError("constants L1, L2, L must be positive");
  if (!(cfg.budgets.exact_ops > 0.0)) throw ConfigError("budgets.exact_ops must be positive");
  if (cfg.budgets.search_cap < 1) throw ConfigError("budgets.search_cap must be positive");
  if (!(cfg.tail_reserve > 0.0 && cfg.tail_reserve < 1.0))
    throw ConfigError("schedule.tail_reserve must lie in (0, 1)");
  if (!(cfg.eps0 > 0.0 && cfg.eps0 < 1.0)) throw ConfigError("schedule.eps0 must lie in (0, 1)");
  if (cfg.mds_window < 1 || cfg.mds_window > 6) throw ConfigError("mds_window must lie in [1, 6]");
  if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"schema_version", "variant", "rate", "K", "noise_a", "constants", "seed", "budgets",
                  "schedule", "mds_window", "output_dir"},
                 "config");
  if (!j.contains("schema_version")) throw ConfigError("config needs schema_version");
  if (!j.contains("variant")) throw ConfigError("config needs variant");
  ExperimentConfig cfg;
  read(j, "schema_version", cfg.schema_version, "config");
  std::string variant;
  read(j, "variant", variant, "config");
  try {
    cfg.variant = variant_from_string(variant);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (j.contains("rate")) {
    const auto& r = j.at("rate");
    reject_unknown(r, {"family", "c", "beta"}, "rate");
    read(r, "family", cfg.rate.family, "rate");
    read(r, "c", cfg.rate.c, "rate");
    read(r, "beta", cfg.rate.beta, "rate");
  }
  std::int64_t K = cfg.K, window = cfg.mds_window;
  read_int64(j, "K", K, "config");
  read_int64(j, "mds_window", window, "config");
  if (K < -1000000 || K > 1000000 || window < -1000000 || window > 1000000)
    throw ConfigError("integer field out of range");
  cfg.K = static_cast<int>(K);
  cfg.mds_window = static_cast<int>(window);
  read(j, "noise_a", cfg.noise_a, "config");
  if (j.contains("constants")) {
    const auto& c = j.at("constants");
    reject_unknown(c, {"L1", "L2", "L"}, "constants");
    read(c, "L1", cfg.L1, "constants");
    read(c, "L2", cfg.L2, "constants");
    read(c, "L", cfg.L, "constants");
  }
  if (j.contains("seed")) {
    std::int64_t seed = 0;
    read_int64(j, "seed", seed, "config");
    if (seed < 0) throw ConfigError("seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  if (j.contains("budgets")) {
    const auto& b = j.at("budgets");
    reject_unknown(b, {"exact_ops", "mc_reps", "search_cap"}, "budgets");
    read(b, "exact_ops", cfg.budgets.exact_ops, "budgets");
    std::int64_t reps = static_cast<std::int64_t>(cfg.budgets.mc_reps);
    read_int64(b, "mc_reps", reps, "budgets");
    if (reps < 0) throw ConfigError("budgets.mc_reps must be nonnegative");
    cfg.budgets.mc_reps = static_cast<std::size_t>(reps);
    read_int64(b, "search_cap", cfg.budgets.search_cap, "budgets");
  }
  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    reject_unknown(s, {"tail_reserve", "eps0"}, "schedule");
    read(s, "tail_reserve", cfg.tail_reserve, "schedule");
    read(s, "eps0", cfg.eps0, "schedule");
  }
  read(j, "output_dir", cfg.output_dir, "config");
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["variant"] = to_string(cfg.variant);
  j["rate"] = {{"family", cfg.rate.family}, {"c", cfg.rate.c}, {"beta", cfg.rate.beta}};
  j["K"] = cfg.K;
  j["noise_a"] = cfg.noise_a;
  j["constants"] = {{"L1", cfg.L1}, {"L2", cfg.L2}, {"L", cfg.L}};
  if (cfg.seed) j["seed"] = *cfg.seed;
  j["budgets"] = {{"exact_ops", cfg.budgets.exact_ops},
                  {"mc_reps", cfg.budgets.mc_reps},
                  {"search_cap", cfg.budgets.search_cap}};
  j["schedule"] = {{"tail_reserve", cfg.tail_reserve}, {"eps0", cfg.eps0}};
  j["mds_window"] = cfg.mds_window;
  j["output_dir"] = cfg.output_dir;
  return j.dump(2) + "\n";
}

}  // namespace mdsllt
