#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdsllt/construction.hpp"
#include "mdsllt/diagnostics.hpp"

namespace mdsllt {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct RateConfig {
  std::string family = "power";  // power | log | constant
  double c = 0.5;
  double beta = 0.5;  // power law only

  RateSequence make() const;
};

/// Inverse of RateSequence::descriptor() for the built-in families.
RateSequence rate_from_descriptor(const std::string& descriptor);

struct Budgets {
  double exact_ops = 1e9;  // occupancy DP and exact MDS enumeration
  std::size_t mc_reps = 100'000;
  std::int64_t search_cap = 10'000'000;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  Variant variant = Variant::Thm1;
  RateConfig rate;
  int K = 3;
  double noise_a = 1.0;  // lattice variants
  double L1 = 1.0, L2 = 100.0, L = 3.0;  // density variant
  std::optional<std::uint64_t> seed;
  Budgets budgets;
  double tail_reserve = 0.2;
  double eps0 = 0.1;
  int mds_window = 4;
  std::string output_dir = "report";
  /// Worker threads for Monte Carlo; 0 means hardware concurrency. Never
  /// affects results and is not written to reports.
  unsigned workers = 0;
};

/// Parses and validates a JSON config. Unknown fields, wrong types and
/// out-of-range values raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string dump_config(const ExperimentConfig& cfg);
void validate(const ExperimentConfig& cfg);

Schedule make_schedule(const ExperimentConfig& cfg);
ProcessModel make_model(const ExperimentConfig& cfg, const Schedule& sched);

struct ModelSummary {
  std::size_t states = 0;
  std::vector<TowerSpec> towers;
  double mu_A = 0.0;
  double sigma2 = 0.0;
  std::vector<double> block_measure;
  std::vector<double> intersection;
};

ModelSummary summarize(const ProcessModel& model);

struct CurvePoint {
  int k = -1;
  std::int64_t n = 0;
  double llt_value = 0.0, llt_bound = 0.0;
  double clt_value = 0.0, clt_bound = 0.0;
  std::string method;
};

struct ReportBundle {
  ExperimentConfig config;
  std::string timestamp;
  Schedule schedule;
  ModelSummary model;
  std::vector<ProbeResult> probes;
  std::optional<MixingProfile> mixing;
  std::vector<CurvePoint> curves;
  bool pass = false;
};

/// Number of probes a bundle must contain.
std::size_t expected_probe_count(Variant v, int K);

ReportBundle run_experiment(const ExperimentConfig& cfg);

std::string utc_timestamp();

/// Line-delimited JSON records, numbers with 17 significant digits.
std::string to_ndjson(const ReportBundle& bundle);
std::string to_text(const ReportBundle& bundle);
std::string to_csv(const ReportBundle& bundle);

/// Writes report.txt, report.ndjson and curves.csv into `dir`.
void write_report(const ReportBundle& bundle, const std::string& dir);

/// Write to a temporary file next to `path`, then rename over it.
void write_atomically(const std::string& path, const std::string& content);

struct VerifyResult {
  std::size_t probes = 0;
  bool pass = false;  // overall pass flag recorded in the bundle
};

/// Recomputes every closed-form bound from the schedule in a report.ndjson
/// and checks each probe's bound field and pass flag. Throws ParseError or
/// BoundMismatch.
VerifyResult verify_certificate(const std::string& path);
VerifyResult verify_certificate_text(const std::string& text);

}  // namespace mdsllt
