#include "invtransfer/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "invtransfer/decomposition.hpp"
#include "invtransfer/errors.hpp"

namespace invtransfer {

namespace fs = std::filesystem;

std::string format_double(double value)
{
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

namespace {

double parse_double(const std::string& token, std::size_t line)
{
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end)
    throw ParseError("line " + std::to_string(line) + ": not a number: '" + token + "'");
  return value;
}

std::vector<std::string> split(const std::string& line, char sep)
{
  std::vector<std::string> out;
  std::string token;
  std::istringstream in(line);
  while (std::getline(in, token, sep))
    out.push_back(token);
  if (!line.empty() && line.back() == sep)
    out.emplace_back();
  return out;
}

} // namespace

std::string archive_to_csv(const Archive& archive)
{
  std::string out;
  for (int j = 0; j < archive.d(); ++j)
    out += "x" + std::to_string(j + 1) + ",";
  for (int k = 0; k < archive.m(); ++k)
    out += "f" + std::to_string(k + 1) + ",";
  out += "iteration\n";
  for (const ArchiveEntry& e : archive.entries()) {
    for (Eigen::Index j = 0; j < e.x.size(); ++j)
      out += format_double(e.x[j]) + ",";
    for (Eigen::Index k = 0; k < e.f.size(); ++k)
      out += format_double(e.f[k]) + ",";
    out += std::to_string(e.iteration) + "\n";
  }
  return out;
}

Archive archive_from_csv(const std::string& text)
{
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("archive.csv: empty file");
  const std::vector<std::string> header = split(line, ',');
  int d = 0;
  int m = 0;
  for (const std::string& h : header) {
    if (!h.empty() && h[0] == 'x')
      ++d;
    else if (!h.empty() && h[0] == 'f')
      ++m;
  }
  if (header.empty() || header.back() != "iteration" || d + m + 1 != static_cast<int>(header.size()))
    throw ParseError("archive.csv line 1: expected header x1..xd,f1..fm,iteration");
  Archive archive(d, m);
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty())
      continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != header.size())
      throw ParseError("archive.csv line " + std::to_string(number) + ": expected " +
                       std::to_string(header.size()) + " fields");
    VectorXd x(d);
    VectorXd f(m);
    for (int j = 0; j < d; ++j)
      x[j] = parse_double(cells[j], number);
    for (int k = 0; k < m; ++k)
      f[k] = parse_double(cells[d + k], number);
    const int iteration = static_cast<int>(parse_double(cells.back(), number));
    archive.add(std::move(x), std::move(f), iteration);
  }
  return archive;
}

std::string trace_to_jsonl(const std::vector<TraceRecord>& trace)
{
  std::string out;
  for (const TraceRecord& r : trace)
    out += nlohmann::json(r).dump() + "\n";
  return out;
}

std::vector<TraceRecord> trace_from_jsonl(const std::string& text)
{
  std::vector<TraceRecord> out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty())
      continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<TraceRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("trace.jsonl line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

nlohmann::json models_to_json(const std::vector<VariableModel>& models)
{
  nlohmann::json out = nlohmann::json::array();
  for (const VariableModel& model : models)
    out.push_back(nlohmann::json(model));
  return out;
}

std::vector<VariableModel> models_from_json(const nlohmann::json& j)
{
  std::vector<VariableModel> out;
  for (const auto& entry : j)
    out.push_back(entry.get<VariableModel>());
  return out;
}

std::string read_text_file(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const fs::path& path, const std::string& text)
{
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error("cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out)
      throw Error("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------

RunResult StoredRun::to_result() const
{
  RunResult r;
  r.config = config;
  r.archive = archive;
  r.nondominated = nondominated;
  r.inverse_models = models;
  r.trace = trace;
  r.normalizer = normalizer;
  r.preference_set = preference_set;
  r.failure = failure;
  return r;
}

void save_run(const RunResult& result, const RunInfo& info, const fs::path& dir)
{
  fs::create_directories(dir);
  write_text_file(dir / "archive.csv", archive_to_csv(result.archive));
  write_text_file(dir / "trace.jsonl", trace_to_jsonl(result.trace));
  write_text_file(dir / "models.json", models_to_json(result.inverse_models).dump() + "\n");

  nlohmann::json problem{{"id", info.problem_id}, {"d", result.archive.d()}, {"m", result.archive.m()}};
  if (info.benchmark)
    problem["benchmark"] = *info.benchmark;
  nlohmann::json meta{{"format", "invtransfer.run"},
                      {"version", kRunFormatVersion},
                      {"name", info.name},
                      {"seed", result.config.seed},
                      {"variant", to_string(result.config.variant)},
                      {"problem", std::move(problem)},
                      {"config", result.config},
                      {"preference_sampling", "cycle-without-replacement"},
                      {"preference_set", preference_set_to_json(result.preference_set, 0)},
                      {"normalizer", result.normalizer},
                      {"evaluations", result.archive.size()},
                      {"nondominated", result.nondominated},
                      {"failure", result.failure ? nlohmann::json(*result.failure) : nlohmann::json()}};
  if (info.overlap)
    meta["overlap"] = *info.overlap;
  if (info.source_path)
    meta["source"] = {{"path", *info.source_path}, {"problem_id", info.source_problem_id.value_or("")}};
  write_text_file(dir / "meta.json", meta.dump(2) + "\n");
}

StoredRun load_run(const fs::path& dir)
{
  StoredRun run;
  run.dir = dir;
  try {
    run.meta = nlohmann::json::parse(read_text_file(dir / "meta.json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(dir.string() + "/meta.json: " + e.what());
  }
  try {
    const nlohmann::json& meta = run.meta;
    if (meta.value("format", std::string()) != "invtransfer.run")
      throw ParseError(dir.string() + "/meta.json: not a run directory");
    const int version = meta.at("version").get<int>();
    if (version != kRunFormatVersion)
      throw ParseError(dir.string() + "/meta.json: unsupported version " + std::to_string(version));
    run.info.name = meta.at("name").get<std::string>();
    const nlohmann::json& problem = meta.at("problem");
    run.info.problem_id = problem.at("id").get<std::string>();
    if (problem.contains("benchmark"))
      run.info.benchmark = problem.at("benchmark").get<MdtlzSpec>();
    if (meta.contains("overlap"))
      run.info.overlap = meta.at("overlap").get<OverlapMap>();
    if (meta.contains("source")) {
      run.info.source_path = meta.at("source").at("path").get<std::string>();
      run.info.source_problem_id = meta.at("source").value("problem_id", std::string());
    }
    run.config = meta.at("config").get<OptimizerConfig>();
    run.normalizer = meta.at("normalizer").get<ObjectiveNormalizer>();
    run.preference_set = preference_set_from_json(meta.at("preference_set"));
    run.nondominated = meta.at("nondominated").get<std::vector<int>>();
    if (!meta.at("failure").is_null())
      run.failure = meta.at("failure").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(dir.string() + "/meta.json: " + e.what());
  }
  run.archive = archive_from_csv(read_text_file(dir / "archive.csv"));
  run.trace = trace_from_jsonl(read_text_file(dir / "trace.jsonl"));
  try {
    run.models = models_from_json(nlohmann::json::parse(read_text_file(dir / "models.json")));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(dir.string() + "/models.json: " + e.what());
  }
  for (int i : run.nondominated)
    if (i < 0 || i >= run.archive.size())
      throw ValidationError(dir.string() + ": nondominated index outside the archive");
  return run;
}

std::vector<fs::path> find_run_dirs(const fs::path& root)
{
  std::vector<fs::path> out;
  for (const fs::directory_entry& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_directory() || name.empty() || name[0] == '.')
      continue;
    if (fs::exists(entry.path() / "meta.json"))
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace invtransfer
