#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "invtransfer/inverse_gp.hpp"
#include "invtransfer/problems.hpp"

namespace invtransfer {

struct OverlapMap;
struct RunResult;

/// Mean over reference rows of the distance to the nearest approximation row.
/// Throws DomainError on empty inputs, DimensionError on differing m.
double igd(const MatrixXd& reference_f, const MatrixXd& approx_f);

/// Pareto-optimal decision vectors with their objective images and the
/// preference vectors a given normalizer assigns to them.
struct RmseTestSet {
  MatrixXd w;
  MatrixXd x;
  MatrixXd f;
};

RmseTestSet make_rmse_test_set(const ReferenceFront& front, const ObjectiveNormalizer& normalizer);

/// sqrt(sum_i |f(x_i) - f(x_pred_i)|^2 / N) where x_pred_i stacks the predicted
/// means at w_i, clamped to the problem box. Evaluations are metric-only.
double rmse_inverse(const std::vector<VariableModel>& models, const RmseTestSet& test, const Problem& problem);

/// Sample Pearson correlation between the scalarized objectives of two tasks
/// over jointly drawn (x, w). Target variables are uniform; each overlapped
/// source variable copies its target partner and the rest are uniform. Each
/// task's objectives are normalized over the sample before scalarizing.
/// Throws DomainError when either sequence has zero variance.
double pearson_scalarized(const Problem& source, const Problem& target, const OverlapMap& overlap, int n_samples,
                          std::uint64_t seed, double eta = 0.05);

double pearson(const VectorXd& a, const VectorXd& b);

struct Quantiles {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

/// Linear-interpolation quantiles (q25, median, q75). Throws DomainError on empty input.
Quantiles quantiles(std::vector<double> values);

struct MetricReport {
  std::string label;
  int seeds = 0;
  /// Seed of each run, in run order.
  std::vector<std::uint64_t> run_seeds;
  std::vector<int> checkpoints;
  /// checkpoint -> one IGD per run, in run order
  std::map<int, std::vector<double>> igd_runs;
  std::map<int, Quantiles> igd;
  std::vector<double> rmse_runs;
  std::optional<Quantiles> rmse;
};

/// {25, 50, 75, 100} restricted to [n_init, budget], plus the budget itself.
std::vector<int> default_checkpoints(int n_init, int budget);

/// IGD of the dominance-filtered archive prefix at each checkpoint and final
/// inverse-model RMSE per run. Throws ConfigError when the runs' configs
/// differ in anything but the seed.
MetricReport aggregate(const std::vector<const RunResult*>& runs, const ReferenceFront& front, const Problem& problem,
                       std::vector<int> checkpoints = {}, const std::string& label = "");

nlohmann::json report_to_json(const MetricReport& report);
/// Header: label,metric,checkpoint,quantile,value
std::string report_to_csv(const std::vector<MetricReport>& reports);

} // namespace invtransfer
