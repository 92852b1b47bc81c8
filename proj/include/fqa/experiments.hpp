#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fqa/inference.hpp"
#include "fqa/scenarios.hpp"

namespace fqa {

// A parameter swept across power-curve configurations ("c" for far1,
// "C" for tfar1).
struct SweepSpec {
  std::string name;
  std::vector<double> values;
};

struct ExperimentSpec {
  ScenarioSpec scenario;
  Eigen::Index replicates = 500;
  std::vector<double> alphas{0.05};
  Eigen::Index lag = 1;
  FqaGrid grid = FqaGrid::reduced_default();
  Eigen::Index M = 10000;
  std::uint64_t base_seed = 1;
  int parallelism = 1;
  std::optional<Eigen::Index> bandwidth;  // empty = floor(T^(1/3))
  std::optional<SweepSpec> sweep;
};

// One scenario configuration's aggregate over all replicates.
struct ConfigResult {
  bool has_sweep = false;
  std::string sweep_name;
  double sweep_value = 0.0;
  ScenarioSpec scenario;  // concrete scenario (sweep value substituted)
  Eigen::Index replicates = 0;
  std::vector<double> alphas;
  std::vector<Eigen::Index> rejections;  // per alpha: #{stat > c_(1-alpha)}
  std::vector<double> rates;             // rejections / replicates
  std::vector<double> std_errors;        // sqrt(rate (1-rate) / replicates)
  double mean_runtime_seconds = 0.0;     // per-test pipeline mean
};

struct ExperimentReport {
  std::string format_version = "1";
  ExperimentSpec spec;
  std::vector<ConfigResult> configs;
};

// Size study: N null replicates of the scenario, one omnibus test each,
// rejection frequencies per alpha.  Per-replicate seeds derive from
// (base_seed, replicate index, configuration index), so results do not
// depend on parallelism.  Running an AR scenario here warns on stderr but
// proceeds.
ExperimentReport run_size(const ExperimentSpec& spec);

// Power study over the sweep values (or the template's own coefficient when
// no sweep is given).  Scenario kind must be far1 or tfar1; sweep values
// must respect the stationarity bounds.
ExperimentReport run_power(const ExperimentSpec& spec);

// One omnibus test per lag on user data, with per-lag seeds derived from
// `seed`.
std::vector<TestResult> run_data_test(
    const CurveMatrix& m, const std::vector<Eigen::Index>& lags,
    const FqaGrid& grid, const std::vector<double>& alphas, Eigen::Index M,
    std::uint64_t seed, std::optional<Eigen::Index> bandwidth = std::nullopt);

// Loads the CSV (optionally applying the log-return transform) and runs the
// per-lag tests.
std::vector<TestResult> run_data_test(
    const std::filesystem::path& path, bool has_header,
    bool apply_log_returns, const std::vector<Eigen::Index>& lags,
    const FqaGrid& grid, const std::vector<double>& alphas, Eigen::Index M,
    std::uint64_t seed, std::optional<Eigen::Index> bandwidth = std::nullopt);

// Uniformly random permutation of the rows (curves); columns untouched.
CurveMatrix shuffle_series(const CurveMatrix& m, std::uint64_t seed);

struct TimingSummary {
  Eigen::Index replicates = 0;
  double mean_seconds = 0.0;
  double min_seconds = 0.0;
  double max_seconds = 0.0;
};

// Mean wall-clock time of the test pipeline itself over `spec.replicates`
// runs; data generation is excluded from the clock.
TimingSummary time_pipeline(const ExperimentSpec& spec);

// Serializations.  The CSV table is the reproducibility surface: identical
// specs must produce identical bytes, so it carries no wall-clock fields.
// The JSON report carries runtimes unless include_runtime is false.
std::string report_to_csv(const ExperimentReport& report);
std::string report_to_json(const ExperimentReport& report,
                           bool include_runtime = true);
// Two data columns per line (sweep value, rejection rate at `alpha`),
// with a comment header — plottable directly by gnuplot.
std::string report_to_gnuplot(const ExperimentReport& report, double alpha);

// Per-lag test results as a JSON array / fixed-width text table (p-values
// shown with 3 decimals).
std::string results_to_json(const std::vector<TestResult>& results,
                            bool include_runtime = true);
std::string results_to_table(const std::vector<TestResult>& results);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace fqa
