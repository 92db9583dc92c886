#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "invtransfer/metrics.hpp"
#include "invtransfer/optimizer.hpp"

namespace invtransfer {

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "INVTRANSFER_OUTPUT_ROOT";

/// The output root from the environment, or "runs" when unset.
std::filesystem::path default_output_root();

struct ExperimentConfig {
  std::string name = "experiment";
  MdtlzSpec target{Family::Dtlz2, false, 1.0, 0.0, 8, 3};
  /// Resolved against the config file's directory on load.
  std::optional<std::filesystem::path> source_dataset;
  /// Defaults to the leading min(d_S, d_T) variables when a source is given.
  std::optional<OverlapMap> overlap;
  OptimizerConfig optimizer;
  int n_seeds = 1;
  std::uint64_t base_seed = 0;
  std::filesystem::path output_dir;
  /// Seeds run concurrently.
  int jobs = 1;
  int reference_points = 10000;

  /// Throws ConfigError: counts, the source requirement of the variant, and
  /// the source file's existence.
  void validate() const;
};

/// Relative paths inside `j` resolve against `base_dir`.
ExperimentConfig experiment_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json experiment_to_json(const ExperimentConfig& config);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// `<output_dir>/<name>-s<seed>`
std::filesystem::path run_directory(const ExperimentConfig& config, std::uint64_t seed);

struct ExperimentOutcome {
  std::vector<std::filesystem::path> run_dirs;
  MetricReport report;
  std::vector<std::string> failures;
};

/// Executes every seed, saves each run directory and writes
/// `<output_dir>/<name>-metrics.json` and `-metrics.csv`. Runs that fail keep
/// their partial directories and are listed in `failures`.
ExperimentOutcome run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

struct SourceGenerationOptions {
  MdtlzSpec spec{Family::Dtlz2, false, 0.9, 0.05, 6, 3};
  int pop_size = 100;
  int generations = 500;
  int keep = 100;
  std::uint64_t seed = 0;
};

/// Generates and saves a source dataset; returns its row count.
Eigen::Index generate_source_file(const SourceGenerationOptions& options, const std::filesystem::path& out);

struct ReportOutputs {
  std::filesystem::path table_csv;
  std::filesystem::path metrics_json;
  std::filesystem::path trace_csv;
};

/// Aggregates stored runs grouped by experiment name. Each input is a run
/// directory or a directory containing run directories. Writes
/// `<prefix>-table.csv` (checkpoint rows, one median/IQR column pair per
/// group), `<prefix>-metrics.json` and `<prefix>-trace.csv`. Throws before
/// writing anything when no runs are found or groups mix configurations.
ReportOutputs report_runs(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& prefix,
                          int reference_points = 10000);

} // namespace invtransfer
