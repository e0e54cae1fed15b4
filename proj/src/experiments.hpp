#pragma once

// Experiment runner: seeded verification suites producing report rows, with
// CSV and JSON output.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cuculescu.hpp"
#include "report.hpp"

namespace ncgl {

struct ExperimentConfig {
  std::string suite;
  /// Exponents; empty selects the suite default.
  std::vector<double> p_grid;
  /// Size parameters; meaning depends on the suite (see suite_help).
  std::vector<long long> dims;
  int trials = 20;
  std::uint64_t seed = 0;
  std::optional<double> B;
  std::optional<double> beta;
  /// Iteration budget of schur-norms.
  int budget = 200;
  /// Record wall time in the ms column; off by default so output is
  /// byte-identical across runs.
  bool timing = false;
  /// Worker threads; 0 uses NCGL_THREADS or the hardware concurrency.
  int threads = 0;
};

struct ReportRow {
  std::string suite;
  std::string instance;
  std::uint64_t seed = 0;
  double lhs = 0;
  double rhs = 0;
  double constant = 0;
  double margin = 0;
  bool pass = true;
  double ms = 0;
  /// Not part of the CSV.
  std::string flag = "n/a";
  bool defects_ok = true;

  bool operator==(const ReportRow&) const = default;
};

struct RunSummary {
  std::size_t rows = 0;
  std::size_t failures = 0;
  double min_margin = 0;
  bool defects_ok = true;
  /// Constant formulas used by the suite, written out symbolically.
  std::vector<std::string> constants;
};

struct RunResult {
  ExperimentConfig config;
  std::vector<ReportRow> rows;
  RunSummary summary;

  /// 0 iff every row passes, 1 otherwise.
  int exit_code() const { return summary.failures == 0 ? 0 : 1; }
};

const std::vector<std::string>& suite_names();
std::string suite_help(const std::string& suite);

/// Throws a Config error for an unknown suite, trials < 1 or an empty grid,
/// and a Domain error for p outside the suite's range.
void validate(const ExperimentConfig& c);

/// Trials run on a worker pool; trial t draws from Rng::stream(seed, t) and
/// rows are merged in trial order.
RunResult run(const ExperimentConfig& c);

/// Number of worker threads for a requested count (0 = environment default).
int worker_count(int requested);

std::string to_csv(const std::vector<ReportRow>& rows);
std::string to_json(const RunResult& r);
std::vector<ReportRow> rows_from_json(const std::string& text);

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& c);

/// Writes csv or json to `path`; Io error if it cannot be written.
void emit(const RunResult& r, const std::string& format, const std::string& path);

}  // namespace ncgl
