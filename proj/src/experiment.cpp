#include "invtransfer/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "invtransfer/dataset.hpp"
#include "invtransfer/errors.hpp"
#include "invtransfer/io.hpp"
#include "invtransfer/nsga2.hpp"

namespace invtransfer {

namespace fs = std::filesystem;

fs::path default_output_root()
{
  const char* env = std::getenv(kOutputRootEnv);
  return env && *env ? fs::path(env) : fs::path("runs");
}

void ExperimentConfig::validate() const
{
  if (name.empty() || name.find('/') != std::string::npos)
    throw ConfigError("experiment name must be non-empty and contain no '/'");
  target.validate();
  optimizer.validate();
  if (n_seeds < 1)
    throw ConfigError("n_seeds must be at least 1");
  if (jobs < 1)
    throw ConfigError("jobs must be at least 1");
  if (reference_points < 1)
    throw ConfigError("reference_points must be positive");
  if (optimizer.variant == Variant::InverseTransfer) {
    if (!source_dataset)
      throw ConfigError("variant inverse-transfer needs \"source_dataset\"");
    if (!fs::exists(*source_dataset))
      throw ConfigError("source dataset not found: " + source_dataset->string());
  }
}

ExperimentConfig experiment_from_json(const nlohmann::json& j, const fs::path& base_dir)
{
  ExperimentConfig c;
  try {
    c.name = j.value("name", c.name);
    if (j.contains("target"))
      c.target = j.at("target").get<MdtlzSpec>();
    if (j.contains("source_dataset") && !j.at("source_dataset").is_null()) {
      fs::path p = j.at("source_dataset").get<std::string>();
      c.source_dataset = p.is_absolute() ? p : base_dir / p;
    }
    if (j.contains("overlap"))
      c.overlap = j.at("overlap").get<OverlapMap>();
    else if (j.contains("overlap_count"))
      c.overlap = OverlapMap::leading(j.at("overlap_count").get<int>());
    if (j.contains("optimizer"))
      c.optimizer = j.at("optimizer").get<OptimizerConfig>();
    c.n_seeds = j.value("n_seeds", c.n_seeds);
    c.base_seed = j.value("base_seed", c.base_seed);
    c.jobs = j.value("jobs", c.jobs);
    c.reference_points = j.value("reference_points", c.reference_points);
    if (j.contains("output_dir")) {
      fs::path p = j.at("output_dir").get<std::string>();
      c.output_dir = p.is_absolute() ? p : base_dir / p;
    } else {
      c.output_dir = default_output_root();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed experiment config: ") + e.what());
  }
  return c;
}

nlohmann::json experiment_to_json(const ExperimentConfig& c)
{
  nlohmann::json j{{"name", c.name},
                   {"target", c.target},
                   {"optimizer", c.optimizer},
                   {"n_seeds", c.n_seeds},
                   {"base_seed", c.base_seed},
                   {"jobs", c.jobs},
                   {"reference_points", c.reference_points},
                   {"output_dir", c.output_dir.string()}};
  if (c.source_dataset)
    j["source_dataset"] = c.source_dataset->string();
  if (c.overlap)
    j["overlap"] = *c.overlap;
  return j;
}

ExperimentConfig load_experiment_config(const fs::path& path)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return experiment_from_json(j, path.parent_path());
}

fs::path run_directory(const ExperimentConfig& config, std::uint64_t seed)
{
  return config.output_dir / (config.name + "-s" + std::to_string(seed));
}

ExperimentOutcome run_experiment(const ExperimentConfig& config, std::ostream* log)
{
  config.validate();
  const Problem problem = make_mdtlz(config.target);
  const bool transfer = config.optimizer.variant == Variant::InverseTransfer;
  std::optional<InverseDataset> source;
  std::optional<OverlapMap> overlap;
  if (transfer) {
    source = load_dataset(*config.source_dataset);
    overlap = config.overlap ? *config.overlap : OverlapMap::leading(std::min(source->d(), problem.d()));
    overlap->validate(source->d(), problem.d());
  }

  const int n = config.n_seeds;
  std::vector<std::optional<RunResult>> results(n);
  std::vector<std::string> errors(n);
  std::mutex log_mutex;
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < n; i = next++) {
      OptimizerConfig oc = config.optimizer;
      oc.seed = config.base_seed + static_cast<std::uint64_t>(i);
      try {
        RunResult r = run(problem, source ? &*source : nullptr, overlap, oc);
        RunInfo info{config.name, problem.id(), config.target, overlap, std::nullopt, std::nullopt};
        if (transfer) {
          info.source_path = config.source_dataset->string();
          info.source_problem_id = source->provenance().problem_id;
        }
        save_run(r, info, run_directory(config, oc.seed));
        if (r.failure)
          errors[i] = *r.failure;
        results[i] = std::move(r);
        if (log) {
          std::lock_guard lock(log_mutex);
          *log << config.name << " seed " << oc.seed << ": " << results[i]->archive.size() << " evaluations"
               << (errors[i].empty() ? "" : ", failed: " + errors[i]) << "\n";
        }
      } catch (const std::exception& e) {
        errors[i] = e.what();
        if (log) {
          std::lock_guard lock(log_mutex);
          *log << config.name << " seed " << oc.seed << " failed: " << e.what() << "\n";
        }
      }
    }
  };
  const int threads = std::min(config.jobs, n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back(worker);
    for (std::thread& t : pool)
      t.join();
  }

  ExperimentOutcome outcome;
  std::vector<const RunResult*> completed;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(i);
    if (!errors[i].empty())
      outcome.failures.push_back("seed " + std::to_string(seed) + ": " + errors[i]);
    if (results[i]) {
      outcome.run_dirs.push_back(run_directory(config, seed));
      if (errors[i].empty())
        completed.push_back(&*results[i]);
    }
  }
  if (!completed.empty()) {
    const ReferenceFront front = reference_front(config.target, config.reference_points);
    outcome.report = aggregate(completed, front, problem, {}, config.name);
    write_text_file(config.output_dir / (config.name + "-metrics.json"),
                    report_to_json(outcome.report).dump(2) + "\n");
    write_text_file(config.output_dir / (config.name + "-metrics.csv"), report_to_csv({outcome.report}));
  }
  return outcome;
}

Eigen::Index generate_source_file(const SourceGenerationOptions& options, const fs::path& out)
{
  options.spec.validate();
  const Problem problem = make_mdtlz(options.spec);
  const InverseDataset dataset =
      generate_source_dataset(problem, options.pop_size, options.generations, options.keep, options.seed);
  save_dataset(dataset, out);
  return dataset.size();
}

// ---------------------------------------------------------------------------

ReportOutputs report_runs(const std::vector<fs::path>& inputs, const fs::path& prefix, int reference_points)
{
  std::vector<fs::path> dirs;
  for (const fs::path& input : inputs) {
    if (!fs::is_directory(input))
      throw ConfigError("not a directory: " + input.string());
    if (fs::exists(input / "meta.json")) {
      dirs.push_back(input);
    } else {
      const auto found = find_run_dirs(input);
      dirs.insert(dirs.end(), found.begin(), found.end());
    }
  }
  if (dirs.empty())
    throw ConfigError("no run directories found");

  std::vector<StoredRun> stored;
  for (const fs::path& dir : dirs)
    stored.push_back(load_run(dir));

  // groups keyed by experiment name, in first-seen order
  std::vector<std::string> names;
  std::map<std::string, std::vector<const StoredRun*>> groups;
  for (const StoredRun& s : stored) {
    if (!groups.count(s.info.name))
      names.push_back(s.info.name);
    groups[s.info.name].push_back(&s);
  }

  std::vector<MetricReport> reports;
  nlohmann::json metrics = nlohmann::json::object();
  std::ostringstream trace;
  trace.precision(17);
  trace << "label,seed,iteration,evaluations,ucb_selected,ucb_max_candidates,ucb_max_probe,n_nondominated,fallback\n";
  for (const std::string& name : names) {
    const auto& group = groups[name];
    const RunInfo& info = group.front()->info;
    if (!info.benchmark)
      throw ConfigError("run group '" + name + "' has no built-in benchmark; reference front unavailable");
    for (const StoredRun* s : group)
      if (!(s->info.benchmark == info.benchmark))
        throw ConfigError("run group '" + name + "' mixes problems");
    std::vector<RunResult> results;
    results.reserve(group.size());
    for (const StoredRun* s : group)
      results.push_back(s->to_result());
    std::vector<const RunResult*> pointers;
    for (const RunResult& r : results)
      pointers.push_back(&r);
    const Problem problem = make_mdtlz(*info.benchmark);
    const ReferenceFront front = reference_front(*info.benchmark, reference_points);
    reports.push_back(aggregate(pointers, front, problem, {}, name));
    metrics[name] = report_to_json(reports.back());

    for (const StoredRun* s : group)
      for (const TraceRecord& r : s->trace) {
        trace << name << "," << s->config.seed << "," << r.iteration << "," << r.evaluations << ","
              << r.ucb_selected << "," << r.ucb_max_candidates << ",";
        if (r.ucb_max_probe)
          trace << *r.ucb_max_probe;
        trace << "," << r.n_nondominated << "," << (r.fallback ? 1 : 0) << "\n";
      }
  }

  // comparison table: one row per checkpoint, median/q25/q75 columns per group
  std::ostringstream table;
  table.precision(17);
  table << "metric,checkpoint";
  for (const MetricReport& r : reports)
    table << "," << r.label << ":median," << r.label << ":q25," << r.label << ":q75";
  table << "\n";
  std::vector<int> checkpoints;
  for (const MetricReport& r : reports)
    for (int c : r.checkpoints)
      if (std::find(checkpoints.begin(), checkpoints.end(), c) == checkpoints.end())
        checkpoints.push_back(c);
  std::sort(checkpoints.begin(), checkpoints.end());
  for (int c : checkpoints) {
    table << "igd," << c;
    for (const MetricReport& r : reports) {
      const auto it = r.igd.find(c);
      if (it == r.igd.end())
        table << ",,,";
      else
        table << "," << it->second.median << "," << it->second.q25 << "," << it->second.q75;
    }
    table << "\n";
  }
  table << "rmse,final";
  for (const MetricReport& r : reports) {
    if (r.rmse)
      table << "," << r.rmse->median << "," << r.rmse->q25 << "," << r.rmse->q75;
    else
      table << ",,,";
  }
  table << "\n";

  ReportOutputs out{prefix.string() + "-table.csv", prefix.string() + "-metrics.json", prefix.string() + "-trace.csv"};
  write_text_file(out.table_csv, table.str());
  write_text_file(out.metrics_json, metrics.dump(2) + "\n");
  write_text_file(out.trace_csv, trace.str());
  return out;
}

} // namespace invtransfer
