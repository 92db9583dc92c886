#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "invtransfer/optimizer.hpp"

namespace invtransfer {

/// Shortest text that reads back to the same double.
std::string format_double(double value);

/// Header x1..xd,f1..fm,iteration; one row per evaluation in archive order.
std::string archive_to_csv(const Archive& archive);
Archive archive_from_csv(const std::string& text);

std::string trace_to_jsonl(const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> trace_from_jsonl(const std::string& text);

nlohmann::json models_to_json(const std::vector<VariableModel>& models);
std::vector<VariableModel> models_from_json(const nlohmann::json& j);

std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Descriptive fields stored in meta.json next to the optimizer output.
struct RunInfo {
  std::string name;
  /// Problem identifier; `benchmark` is set for built-in problems.
  std::string problem_id;
  std::optional<MdtlzSpec> benchmark;
  std::optional<OverlapMap> overlap;
  std::optional<std::string> source_path;
  std::optional<std::string> source_problem_id;
};

/// A run directory read back from disk.
struct StoredRun {
  std::filesystem::path dir;
  RunInfo info;
  OptimizerConfig config;
  Archive archive;
  std::vector<TraceRecord> trace;
  std::vector<VariableModel> models;
  ObjectiveNormalizer normalizer;
  MatrixXd preference_set;
  std::vector<int> nondominated;
  std::optional<std::string> failure;
  nlohmann::json meta;

  /// Rebuilds the in-memory result (models, archive, trace, config).
  RunResult to_result() const;
};

inline constexpr int kRunFormatVersion = 1;

/// Writes archive.csv, trace.jsonl, models.json and meta.json into `dir`.
void save_run(const RunResult& result, const RunInfo& info, const std::filesystem::path& dir);

/// Throws ParseError / ValidationError for missing or inconsistent files.
StoredRun load_run(const std::filesystem::path& dir);

/// Subdirectories of `root` holding meta.json, sorted by name; dot-directories skipped.
std::vector<std::filesystem::path> find_run_dirs(const std::filesystem::path& root);

} // namespace invtransfer
