#include "invtransfer/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "invtransfer/errors.hpp"
#include "invtransfer/problems.hpp"
#include "invtransfer/simplex.hpp"

namespace invtransfer {

void ScalarizationConfig::validate() const
{
  if (!(eta >= 0.0) || !std::isfinite(eta))
    throw ConfigError("scalarization eta must be a finite non-negative number");
}

double augmented_tchebycheff(const VectorXd& f_norm, const VectorXd& w, const ScalarizationConfig& config)
{
  if (f_norm.size() != w.size() || f_norm.size() == 0)
    throw DimensionError("augmented_tchebycheff: objective and preference lengths differ");
  const Eigen::ArrayXd weighted = w.array() * f_norm.array();
  return weighted.maxCoeff() + config.eta * weighted.sum();
}

VectorXd preference_from_objectives(const VectorXd& f_norm)
{
  if (f_norm.size() == 0)
    throw DimensionError("preference_from_objectives: empty objective vector");
  if (!f_norm.allFinite() || f_norm.minCoeff() <= 0.0)
    throw DomainError("preference_from_objectives: objectives must be finite and strictly positive");
  const VectorXd c = f_norm.sum() * f_norm.cwiseInverse();
  return c / c.sum();
}

double riesz_energy(const MatrixXd& points, double exponent)
{
  double energy = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    for (Eigen::Index j = i + 1; j < points.rows(); ++j)
      energy += std::pow((points.row(i) - points.row(j)).norm(), -exponent);
  return energy;
}

double min_pairwise_distance(const MatrixXd& points)
{
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    for (Eigen::Index j = i + 1; j < points.rows(); ++j)
      best = std::min(best, (points.row(i) - points.row(j)).norm());
  return best;
}

namespace {

MatrixXd riesz_gradient(const MatrixXd& points, double s)
{
  MatrixXd grad = MatrixXd::Zero(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    for (Eigen::Index j = i + 1; j < points.rows(); ++j) {
      const VectorXd diff = (points.row(i) - points.row(j)).transpose();
      const double r2 = diff.squaredNorm();
      const VectorXd g = -s * std::pow(r2, -0.5 * s - 1.0) * diff;
      grad.row(i) += g.transpose();
      grad.row(j) -= g.transpose();
    }
  return grad;
}

MatrixXd project_rows(const MatrixXd& points)
{
  MatrixXd out(points.rows(), points.cols());
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    out.row(i) = project_to_simplex(points.row(i).transpose()).transpose();
  return out;
}

} // namespace

MatrixXd generate_preference_set(int m, int n, std::uint64_t seed, const PreferenceSetOptions& options)
{
  if (m < 2)
    throw ConfigError("generate_preference_set: need at least two objectives");
  if (n < m)
    throw ConfigError("generate_preference_set: need n >= m preference vectors");
  MatrixXd points = spread_simplex_points(m, n);
  if (options.lattice_only)
    return points;

  const double s = options.exponent > 0.0 ? options.exponent : static_cast<double>(m * m);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1e-3);
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    for (Eigen::Index c = 0; c < points.cols(); ++c)
      points(i, c) += normal(rng);
  points = project_rows(points);

  // log energy keeps the comparison well scaled for large exponents
  double energy = std::log(riesz_energy(points, s));
  double step = 0.1 * min_pairwise_distance(points);
  for (int iter = 0; iter < options.max_iterations && step > 1e-12; ++iter) {
    const MatrixXd grad = riesz_gradient(points, s);
    const double scale = grad.rowwise().norm().maxCoeff();
    if (!(scale > 0.0))
      break;
    const MatrixXd trial = project_rows(points - (step / scale) * grad);
    const double trial_energy = std::log(riesz_energy(trial, s));
    if (std::isfinite(trial_energy) && trial_energy < energy) {
      points = trial;
      energy = trial_energy;
      step *= 1.2;
    } else {
      step *= 0.5;
    }
  }

  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    VectorXd w = points.row(i).transpose().cwiseMax(0.0);
    points.row(i) = (w / w.sum()).transpose();
  }
  return points;
}

bool check_proposition1(const VectorXd& pareto_f, const std::vector<VectorXd>& candidates)
{
  const VectorXd w = preference_from_objectives(pareto_f);
  const ScalarizationConfig plain{0.0};
  const double own = augmented_tchebycheff(pareto_f, w, plain);
  for (const VectorXd& f : candidates) {
    if (augmented_tchebycheff(f, w, plain) < own * (1.0 - 1e-12))
      return false;
  }
  return true;
}

bool check_proposition1(const Problem& problem, const VectorXd& pareto_x, const std::vector<VectorXd>& candidates)
{
  std::vector<VectorXd> fs;
  fs.reserve(candidates.size());
  for (const VectorXd& x : candidates)
    fs.push_back(problem.evaluate(x));
  return check_proposition1(problem.evaluate(pareto_x), fs);
}

nlohmann::json preference_set_to_json(const MatrixXd& set, std::uint64_t seed)
{
  nlohmann::json vectors = nlohmann::json::array();
  for (Eigen::Index i = 0; i < set.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < set.cols(); ++c)
      row.push_back(set(i, c));
    vectors.push_back(std::move(row));
  }
  return {{"seed", seed}, {"vectors", std::move(vectors)}};
}

MatrixXd preference_set_from_json(const nlohmann::json& j)
{
  const nlohmann::json& vectors = j.is_array() ? j : j.at("vectors");
  if (vectors.empty())
    throw ParseError("preference set is empty");
  const std::size_t m = vectors.front().size();
  MatrixXd out(vectors.size(), m);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != m)
      throw ParseError("preference set rows differ in length");
    for (std::size_t c = 0; c < m; ++c)
      out(i, c) = vectors[i][c].get<double>();
    if (std::abs(out.row(i).sum() - 1.0) > 1e-9 || out.row(i).minCoeff() < 0.0)
      throw ValidationError("preference set row " + std::to_string(i) + " is not on the simplex");
  }
  return out;
}

} // namespace invtransfer
