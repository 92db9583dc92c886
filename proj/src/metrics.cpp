#include "invtransfer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "invtransfer/decomposition.hpp"
#include "invtransfer/errors.hpp"
#include "invtransfer/optimizer.hpp"

namespace invtransfer {

double igd(const MatrixXd& reference_f, const MatrixXd& approx_f)
{
  if (reference_f.rows() == 0 || approx_f.rows() == 0)
    throw DomainError("igd: reference and approximation sets must be non-empty");
  if (reference_f.cols() != approx_f.cols())
    throw DimensionError("igd: objective counts differ");
  double total = 0.0;
  for (Eigen::Index r = 0; r < reference_f.rows(); ++r) {
    const double d2 = (approx_f.rowwise() - reference_f.row(r)).rowwise().squaredNorm().minCoeff();
    total += std::sqrt(d2);
  }
  return total / static_cast<double>(reference_f.rows());
}

RmseTestSet make_rmse_test_set(const ReferenceFront& front, const ObjectiveNormalizer& normalizer)
{
  RmseTestSet test{MatrixXd(front.size(), front.f.cols()), front.x, front.f};
  for (Eigen::Index i = 0; i < front.size(); ++i)
    test.w.row(i) = preference_from_objectives(normalizer.normalize(front.f.row(i).transpose())).transpose();
  return test;
}

double rmse_inverse(const std::vector<VariableModel>& models, const RmseTestSet& test, const Problem& problem)
{
  if (test.w.rows() == 0)
    throw DomainError("rmse_inverse: empty test set");
  double total = 0.0;
  for (Eigen::Index i = 0; i < test.w.rows(); ++i) {
    const SolutionDistribution dist = predict_solution_distribution(models, test.w.row(i).transpose());
    const VectorXd f_pred = problem.evaluate(problem.clamp(dist.mean));
    total += (test.f.row(i).transpose() - f_pred).squaredNorm();
  }
  return std::sqrt(total / static_cast<double>(test.w.rows()));
}

double pearson(const VectorXd& a, const VectorXd& b)
{
  if (a.size() != b.size() || a.size() < 2)
    throw DimensionError("pearson: need two equally long sequences of length >= 2");
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double saa = (da * da).sum();
  const double sbb = (db * db).sum();
  if (!(saa > 0.0) || !(sbb > 0.0))
    throw DomainError("pearson: correlation undefined for a zero-variance sequence");
  return (da * db).sum() / std::sqrt(saa * sbb);
}

namespace {

VectorXd scalarize_all(const MatrixXd& f, const MatrixXd& w, double eta)
{
  ObjectiveNormalizer normalizer(static_cast<int>(f.cols()));
  normalizer.update_all(f);
  VectorXd out(f.rows());
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    out[i] = augmented_tchebycheff(normalizer.normalize(f.row(i).transpose()), w.row(i).transpose(),
                                   ScalarizationConfig{eta});
  return out;
}

} // namespace

double pearson_scalarized(const Problem& source, const Problem& target, const OverlapMap& overlap, int n_samples,
                          std::uint64_t seed, double eta)
{
  if (n_samples < 100)
    throw ConfigError("pearson_scalarized: need at least 100 samples");
  if (source.m() != target.m())
    throw ConfigError("pearson_scalarized: objective counts differ");
  overlap.validate(source.d(), target.d());
  const int m = target.m();
  std::mt19937_64 shared(mix_seed(seed, 1));
  std::mt19937_64 fill(mix_seed(seed, 2));
  std::mt19937_64 weights(mix_seed(seed, 3));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);

  MatrixXd f_source(n_samples, m);
  MatrixXd f_target(n_samples, m);
  MatrixXd w(n_samples, m);
  VectorXd xt(target.d());
  VectorXd xs(source.d());
  for (int i = 0; i < n_samples; ++i) {
    for (int j = 0; j < target.d(); ++j)
      xt[j] = target.lower()[j] + unit(shared) * (target.upper()[j] - target.lower()[j]);
    for (int j = 0; j < source.d(); ++j)
      xs[j] = source.lower()[j] + unit(fill) * (source.upper()[j] - source.lower()[j]);
    for (const auto& [s, t] : overlap.pairs)
      xs[s] = std::clamp(xt[t], source.lower()[s], source.upper()[s]);
    for (int k = 0; k < m; ++k)
      w(i, k) = expo(weights);
    w.row(i) /= w.row(i).sum();
    f_target.row(i) = target.evaluate(xt).transpose();
    f_source.row(i) = source.evaluate(xs).transpose();
  }
  return pearson(scalarize_all(f_source, w, eta), scalarize_all(f_target, w, eta));
}

Quantiles quantiles(std::vector<double> values)
{
  if (values.empty())
    throw DomainError("quantiles: no values");
  std::sort(values.begin(), values.end());
  auto at = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return Quantiles{at(0.5), at(0.25), at(0.75)};
}

std::vector<int> default_checkpoints(int n_init, int budget)
{
  std::vector<int> out;
  for (int c : {25, 50, 75, 100})
    if (c >= n_init && c <= budget)
      out.push_back(c);
  if (out.empty() || out.back() != budget)
    out.push_back(budget);
  return out;
}

MetricReport aggregate(const std::vector<const RunResult*>& runs, const ReferenceFront& front, const Problem& problem,
                       std::vector<int> checkpoints, const std::string& label)
{
  if (runs.empty())
    throw ConfigError("aggregate: no runs");
  auto comparable = [](OptimizerConfig c) {
    c.seed = 0;
    return nlohmann::json(c);
  };
  const nlohmann::json reference_config = comparable(runs.front()->config);
  for (const RunResult* r : runs)
    if (comparable(r->config) != reference_config)
      throw ConfigError("aggregate: runs were produced with different configurations");
  if (checkpoints.empty())
    checkpoints = default_checkpoints(runs.front()->config.n_init, runs.front()->config.budget);

  MetricReport report;
  report.label = label;
  report.seeds = static_cast<int>(runs.size());
  report.checkpoints = checkpoints;
  for (const RunResult* r : runs) {
    report.run_seeds.push_back(r->config.seed);
    for (int c : checkpoints) {
      const MatrixXd f = r->archive.f_matrix(c);
      MatrixXd nd(0, f.cols());
      const std::vector<int> keep = nondominated_filter(f);
      nd.resize(static_cast<Eigen::Index>(keep.size()), f.cols());
      for (std::size_t i = 0; i < keep.size(); ++i)
        nd.row(static_cast<Eigen::Index>(i)) = f.row(keep[i]);
      report.igd_runs[c].push_back(igd(front.f, nd));
    }
    if (!r->inverse_models.empty())
      report.rmse_runs.push_back(rmse_inverse(r->inverse_models, make_rmse_test_set(front, r->normalizer), problem));
  }
  for (const auto& [c, values] : report.igd_runs)
    report.igd[c] = quantiles(values);
  if (!report.rmse_runs.empty())
    report.rmse = quantiles(report.rmse_runs);
  return report;
}

namespace {

nlohmann::json quantiles_json(const Quantiles& q) { return {{"median", q.median}, {"q25", q.q25}, {"q75", q.q75}}; }

} // namespace

nlohmann::json report_to_json(const MetricReport& report)
{
  nlohmann::json igd_json = nlohmann::json::object();
  for (const auto& [c, q] : report.igd) {
    nlohmann::json entry = quantiles_json(q);
    entry["runs"] = report.igd_runs.at(c);
    igd_json[std::to_string(c)] = std::move(entry);
  }
  nlohmann::json out{{"label", report.label},
                     {"seeds", report.seeds},
                     {"run_seeds", report.run_seeds},
                     {"checkpoints", report.checkpoints},
                     {"igd", std::move(igd_json)}};
  if (report.rmse) {
    nlohmann::json entry = quantiles_json(*report.rmse);
    entry["runs"] = report.rmse_runs;
    out["rmse_final"] = std::move(entry);
  } else {
    out["rmse_final"] = nullptr;
  }
  return out;
}

std::string report_to_csv(const std::vector<MetricReport>& reports)
{
  std::ostringstream out;
  out.precision(17);
  out << "label,metric,checkpoint,quantile,value\n";
  for (const MetricReport& r : reports) {
    for (const auto& [c, q] : r.igd) {
      out << r.label << ",igd," << c << ",median," << q.median << "\n";
      out << r.label << ",igd," << c << ",q25," << q.q25 << "\n";
      out << r.label << ",igd," << c << ",q75," << q.q75 << "\n";
    }
    if (r.rmse) {
      const int last = r.checkpoints.empty() ? 0 : r.checkpoints.back();
      out << r.label << ",rmse," << last << ",median," << r.rmse->median << "\n";
      out << r.label << ",rmse," << last << ",q25," << r.rmse->q25 << "\n";
      out << r.label << ",rmse," << last << ",q75," << r.rmse->q75 << "\n";
    }
  }
  return out.str();
}

} // namespace invtransfer
