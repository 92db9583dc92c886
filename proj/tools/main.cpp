// invtransfer command line: gen-source, run, report, serve.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "invtransfer/errors.hpp"
#include "invtransfer/experiment.hpp"
#include "invtransfer/explorer.hpp"

namespace it = invtransfer;

namespace {

struct GenSourceArgs {
  std::string family = "DTLZ2";
  double delta1 = 0.9;
  double delta2 = 0.05;
  int d = 6;
  int m = 3;
  bool inverted = false;
  it::SourceGenerationOptions options;
  std::string out;
};

struct RunArgs {
  std::string config;
  std::optional<int> seeds;
  std::string out;
  std::string variant;
  std::optional<int> budget;
  std::optional<int> jobs;
};

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out = "report";
  int reference_points = 10000;
};

struct ServeArgs {
  std::string root;
  std::string host = "127.0.0.1";
  int port = 8080;
};

int gen_source(const GenSourceArgs& a)
{
  it::SourceGenerationOptions options = a.options;
  options.spec = it::MdtlzSpec{it::family_from_string(a.family), a.inverted, a.delta1, a.delta2, a.d, a.m};
  const auto rows = it::generate_source_file(options, a.out);
  std::cout << "wrote " << rows << " rows of " << options.spec.id() << " to " << a.out << "\n";
  return 0;
}

int run(const RunArgs& a)
{
  it::ExperimentConfig config = it::load_experiment_config(a.config);
  if (a.seeds)
    config.n_seeds = *a.seeds;
  if (!a.out.empty())
    config.output_dir = a.out;
  if (!a.variant.empty())
    config.optimizer.variant = it::variant_from_string(a.variant);
  if (a.budget)
    config.optimizer.budget = *a.budget;
  if (a.jobs)
    config.jobs = *a.jobs;
  const it::ExperimentOutcome outcome = it::run_experiment(config, &std::cerr);
  for (const std::string& failure : outcome.failures)
    std::cerr << "error: " << failure << "\n";
  if (!outcome.failures.empty())
    return 1;
  std::cout << "wrote " << outcome.run_dirs.size() << " runs and "
            << (config.output_dir / (config.name + "-metrics.json")).string() << "\n";
  return 0;
}

int report(const ReportArgs& a)
{
  std::vector<std::filesystem::path> inputs(a.inputs.begin(), a.inputs.end());
  const it::ReportOutputs out = it::report_runs(inputs, a.out, a.reference_points);
  std::cout << "wrote " << out.table_csv.string() << ", " << out.metrics_json.string() << ", "
            << out.trace_csv.string() << "\n";
  return 0;
}

int serve(const ServeArgs& a)
{
  it::ExplorerService service(a.root.empty() ? it::default_output_root() : std::filesystem::path(a.root));
  std::cerr << "serving " << service.root().string() << " on http://" << a.host << ":" << a.port << "\n";
  if (!it::serve(service, a.host, a.port)) {
    std::cerr << "error: cannot listen on " << a.host << ":" << a.port << "\n";
    return 1;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Inverse-transfer multiobjective optimization"};
  app.require_subcommand(1);

  GenSourceArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen-source", "Optimize a source problem and save its inverse dataset");
  gen_cmd->add_option("--family", gen.family, "DTLZ1..DTLZ4")->capture_default_str();
  gen_cmd->add_option("--delta1", gen.delta1)->capture_default_str();
  gen_cmd->add_option("--delta2", gen.delta2)->capture_default_str();
  gen_cmd->add_option("--d", gen.d, "Decision variables")->capture_default_str();
  gen_cmd->add_option("--m", gen.m, "Objectives")->capture_default_str();
  gen_cmd->add_flag("--inverted", gen.inverted);
  gen_cmd->add_option("--pop", gen.options.pop_size)->capture_default_str();
  gen_cmd->add_option("--generations", gen.options.generations)->capture_default_str();
  gen_cmd->add_option("--keep", gen.options.keep, "Rows kept")->capture_default_str();
  gen_cmd->add_option("--seed", gen.options.seed)->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Dataset path")->required();

  RunArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "Run an experiment config over its seeds");
  run_cmd->add_option("--config", run_args.config)->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seeds", run_args.seeds, "Override n_seeds");
  run_cmd->add_option("--out", run_args.out, std::string("Override output_dir (default $") + it::kOutputRootEnv +
                                                  " or ./runs)");
  run_cmd->add_option("--variant", run_args.variant, "inverse-transfer, no-transfer or parego-ucb");
  run_cmd->add_option("--budget", run_args.budget, "Override the evaluation budget");
  run_cmd->add_option("--jobs", run_args.jobs, "Seeds run concurrently");

  ReportArgs report_args;
  CLI::App* report_cmd = app.add_subcommand("report", "Aggregate run directories into tables and traces");
  report_cmd->add_option("inputs", report_args.inputs, "Run directories or their parents")->required();
  report_cmd->add_option("--out", report_args.out, "Output prefix")->capture_default_str();
  report_cmd->add_option("--reference-points", report_args.reference_points)->capture_default_str();

  ServeArgs serve_args;
  CLI::App* serve_cmd = app.add_subcommand("serve", "Serve the explorer HTTP API over an output root");
  serve_cmd->add_option("--root", serve_args.root, "Output root (default from the environment)");
  serve_cmd->add_option("--host", serve_args.host)->capture_default_str();
  serve_cmd->add_option("--port", serve_args.port)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_cmd->parsed())
      return gen_source(gen);
    if (run_cmd->parsed())
      return run(run_args);
    if (report_cmd->parsed())
      return report(report_args);
    return serve(serve_args);
  } catch (const it::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 1;
}
