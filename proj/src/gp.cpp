#include "invtransfer/gp.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "invtransfer/errors.hpp"
#include "invtransfer/lbfgs.hpp"

namespace invtransfer {

KernelParams KernelParams::isotropic(int dim, double lengthscale, double signal_variance)
{
  return KernelParams{signal_variance, VectorXd::Constant(dim, lengthscale)};
}

nlohmann::json vector_to_json(const VectorXd& v)
{
  return std::vector<double>(v.data(), v.data() + v.size());
}

VectorXd vector_from_json(const nlohmann::json& j)
{
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json matrix_to_json(const MatrixXd& m)
{
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    rows.push_back(vector_to_json(m.row(i).transpose()));
  return rows;
}

MatrixXd matrix_from_json(const nlohmann::json& j)
{
  if (!j.is_array())
    throw ParseError("expected an array of rows");
  if (j.empty())
    return MatrixXd(0, 0);
  const std::size_t cols = j.front().size();
  MatrixXd m(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != cols)
      throw ParseError("ragged matrix row " + std::to_string(i));
    for (std::size_t c = 0; c < cols; ++c)
      m(i, c) = j[i][c].get<double>();
  }
  return m;
}

void to_json(nlohmann::json& j, const KernelParams& params)
{
  j = nlohmann::json{{"signal_variance", params.signal_variance},
                     {"lengthscales", vector_to_json(params.lengthscales)}};
}

void from_json(const nlohmann::json& j, KernelParams& params)
{
  params.signal_variance = j.at("signal_variance").get<double>();
  params.lengthscales = vector_from_json(j.at("lengthscales"));
}

double kernel_eval(const KernelParams& params, const VectorXd& a, const VectorXd& b)
{
  if (a.size() != params.lengthscales.size() || b.size() != params.lengthscales.size())
    throw DimensionError("kernel_eval: input dimension does not match lengthscale count");
  const double r2 = ((a - b).array() / params.lengthscales.array()).square().sum();
  return params.signal_variance * std::exp(-0.5 * r2);
}

MatrixXd kernel_matrix(const KernelParams& params, const MatrixXd& a, const MatrixXd& b)
{
  if (a.cols() != params.dim() || b.cols() != params.dim())
    throw DimensionError("kernel_matrix: input dimension does not match lengthscale count");
  const Eigen::RowVectorXd inv_ls = params.lengthscales.cwiseInverse().transpose();
  const MatrixXd as = a.array().rowwise() * inv_ls.array();
  const MatrixXd bs = b.array().rowwise() * inv_ls.array();
  MatrixXd r2 = (-2.0 * as * bs.transpose()).colwise() + as.rowwise().squaredNorm();
  r2.rowwise() += bs.rowwise().squaredNorm().transpose();
  return params.signal_variance * (-0.5 * r2.array().max(0.0)).exp().matrix();
}

MatrixXd kernel_matrix(const KernelParams& params, const MatrixXd& a)
{
  if (a.cols() != params.dim())
    throw DimensionError("kernel_matrix: input dimension does not match lengthscale count");
  const Eigen::Index n = a.rows();
  MatrixXd k(n, n);
  const VectorXd inv_ls = params.lengthscales.cwiseInverse();
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = params.signal_variance;
    for (Eigen::Index c = 0; c < i; ++c) {
      const double r2 = ((a.row(i) - a.row(c)).transpose().array() * inv_ls.array()).square().sum();
      k(i, c) = k(c, i) = params.signal_variance * std::exp(-0.5 * r2);
    }
  }
  return k;
}

// ---------------------------------------------------------------------------

JitteredCholesky::JitteredCholesky(const MatrixXd& matrix)
{
  llt_.compute(matrix);
  if (llt_.info() == Eigen::Success)
    return;
  const double scale = std::max(matrix.diagonal().mean(), std::numeric_limits<double>::min());
  for (double factor = 1e-10; factor <= 1e-4 * 1.0000001; factor *= 10.0) {
    MatrixXd jittered = matrix;
    jittered.diagonal().array() += factor * scale;
    llt_.compute(jittered);
    if (llt_.info() == Eigen::Success) {
      jitter_ = factor * scale;
      return;
    }
  }
  throw NumericalError("Cholesky factorization failed after jitter escalation to 1e-4 * mean(diag)");
}

double JitteredCholesky::log_determinant() const
{
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

MatrixXd JitteredCholesky::inverse() const
{
  const Eigen::Index n = llt_.matrixLLT().rows();
  return llt_.solve(MatrixXd::Identity(n, n));
}

// ---------------------------------------------------------------------------

VectorXd pack_log(const KernelParams& kernel, double noise_variance)
{
  VectorXd theta(kernel.dim() + 2);
  theta[0] = std::log(kernel.signal_variance);
  theta.segment(1, kernel.dim()) = kernel.lengthscales.array().log();
  theta[kernel.dim() + 1] = std::log(noise_variance);
  return theta;
}

KernelParams unpack_kernel(const VectorXd& theta, int dim)
{
  return KernelParams{std::exp(theta[0]), theta.segment(1, dim).array().exp().matrix()};
}

double log_marginal_likelihood(const MatrixXd& inputs, const VectorXd& targets, const KernelParams& kernel,
                               double noise_variance)
{
  if (inputs.rows() != targets.size() || inputs.rows() < 1)
    throw DimensionError("log_marginal_likelihood: need N >= 1 inputs matching the targets");
  MatrixXd a = kernel_matrix(kernel, inputs);
  a.diagonal().array() += noise_variance;
  const JitteredCholesky factor(a);
  const VectorXd alpha = factor.solve(targets);
  return -0.5 * targets.dot(alpha) - 0.5 * factor.log_determinant();
}

LikelihoodEval log_marginal_likelihood_with_gradient(const MatrixXd& inputs, const VectorXd& targets,
                                                     const KernelParams& kernel, double noise_variance)
{
  if (inputs.rows() != targets.size() || inputs.rows() < 1)
    throw DimensionError("log_marginal_likelihood: need N >= 1 inputs matching the targets");
  const Eigen::Index n = inputs.rows();
  const int dim = kernel.dim();
  const MatrixXd k = kernel_matrix(kernel, inputs);
  MatrixXd a = k;
  a.diagonal().array() += noise_variance;
  const JitteredCholesky factor(a);
  const VectorXd alpha = factor.solve(targets);

  LikelihoodEval out;
  out.value = -0.5 * targets.dot(alpha) - 0.5 * factor.log_determinant();

  // d/dtheta = 1/2 tr((alpha alpha^T - A^-1) dA/dtheta)
  MatrixXd w = alpha * alpha.transpose() - factor.inverse();
  const MatrixXd wk = w.cwiseProduct(k);
  out.gradient.resize(dim + 2);
  out.gradient[0] = 0.5 * wk.sum();
  for (int j = 0; j < dim; ++j) {
    const double inv_l2 = 1.0 / (kernel.lengthscales[j] * kernel.lengthscales[j]);
    double acc = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
      const double xc = inputs(c, j);
      for (Eigen::Index r = c + 1; r < n; ++r) {
        const double diff = inputs(r, j) - xc;
        acc += wk(r, c) * diff * diff;
      }
    }
    out.gradient[1 + j] = acc * inv_l2; // symmetric: 2 * 1/2 * sum over r > c
  }
  out.gradient[dim + 1] = 0.5 * noise_variance * w.trace();
  return out;
}

// ---------------------------------------------------------------------------

ForwardGpModel::ForwardGpModel(MatrixXd inputs, VectorXd targets, KernelParams kernel, double noise_variance,
                               double y_offset, double y_scale)
    : inputs_(std::move(inputs)), targets_(std::move(targets)), kernel_(std::move(kernel)),
      noise_variance_(noise_variance), y_offset_(y_offset), y_scale_(y_scale)
{
  if (inputs_.rows() != targets_.size() || inputs_.rows() < 1)
    throw DimensionError("ForwardGpModel: need at least one input row per target");
  if (inputs_.cols() != kernel_.dim())
    throw DimensionError("ForwardGpModel: kernel dimension does not match inputs");
  const VectorXd standardized = (targets_.array() - y_offset_) / y_scale_;
  MatrixXd a = kernel_matrix(kernel_, inputs_);
  a.diagonal().array() += noise_variance_;
  factor_ = JitteredCholesky(a);
  alpha_ = factor_.solve(standardized);
  log_likelihood_ = -0.5 * standardized.dot(alpha_) - 0.5 * factor_.log_determinant();
}

namespace {

struct StartBox {
  VectorXd lower;
  VectorXd upper;
};

StartBox log_bounds(const HyperBounds& b, int dim)
{
  StartBox box{VectorXd(dim + 2), VectorXd(dim + 2)};
  box.lower[0] = std::log(b.min_signal_variance);
  box.upper[0] = std::log(b.max_signal_variance);
  box.lower.segment(1, dim).setConstant(std::log(b.min_lengthscale));
  box.upper.segment(1, dim).setConstant(std::log(b.max_lengthscale));
  box.lower[dim + 1] = std::log(b.min_noise_variance);
  box.upper[dim + 1] = std::log(b.max_noise_variance);
  return box;
}

} // namespace

ForwardGpModel ForwardGpModel::fit(const MatrixXd& inputs, const VectorXd& targets, const TrainConfig& config)
{
  if (inputs.rows() < 2 || inputs.rows() != targets.size())
    throw DomainError("fit_gp: need at least two data points with matching targets");
  if (!inputs.allFinite() || !targets.allFinite())
    throw DomainError("fit_gp: inputs and targets must be finite");

  const int dim = static_cast<int>(inputs.cols());
  double offset = 0.0;
  double scale = 1.0;
  if (config.transform != TargetTransform::None)
    offset = targets.mean();
  if (config.transform == TargetTransform::Standardize) {
    const double sd = std::sqrt((targets.array() - offset).square().mean());
    scale = sd > 1e-12 ? sd : 1.0;
  }
  const VectorXd y = (targets.array() - offset) / scale;

  const StartBox box = log_bounds(config.bounds, dim);
  const VectorXd range = (inputs.colwise().maxCoeff() - inputs.colwise().minCoeff()).transpose();

  // initial signal variance tracks the (possibly unscaled) target spread
  const double spread = std::max(y.squaredNorm() / static_cast<double>(y.size()), config.bounds.min_signal_variance);
  const double sv0 = config.transform == TargetTransform::Standardize ? 1.0 : spread;

  std::vector<VectorXd> starts;
  {
    KernelParams k0{sv0, (0.5 * range.array().max(1e-2)).matrix()};
    double n0 = std::max(1e-3 * sv0, config.bounds.min_noise_variance);
    if (config.warm_kernel && config.warm_kernel->dim() == dim)
      k0 = *config.warm_kernel;
    if (config.warm_noise)
      n0 = *config.warm_noise;
    starts.push_back(pack_log(k0, n0).cwiseMax(box.lower).cwiseMin(box.upper));
  }
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int r = 1; r < config.restarts; ++r) {
    VectorXd theta(dim + 2);
    theta[0] = std::log(0.2 * sv0) + unit(rng) * std::log(25.0);
    for (int j = 0; j < dim; ++j)
      theta[1 + j] = std::log(std::max(range[j], 1e-2)) + std::log(0.05) + unit(rng) * std::log(40.0);
    theta[dim + 1] = std::log(1e-6 * sv0) + unit(rng) * std::log(1e5);
    starts.push_back(theta.cwiseMax(box.lower).cwiseMin(box.upper));
  }

  const Objective objective = [&](const VectorXd& theta, VectorXd& grad) -> double {
    try {
      const KernelParams kernel = unpack_kernel(theta, dim);
      const LikelihoodEval eval = log_marginal_likelihood_with_gradient(inputs, y, kernel, std::exp(theta[dim + 1]));
      grad = -eval.gradient;
      return -eval.value;
    } catch (const NumericalError&) {
      grad = VectorXd::Zero(theta.size());
      return std::numeric_limits<double>::infinity();
    }
  };

  LbfgsOptions options;
  options.max_iterations = config.max_iterations;
  std::optional<LbfgsResult> best;
  for (const VectorXd& start : starts) {
    const LbfgsResult result = minimize_lbfgs(objective, start, box.lower, box.upper, options);
    if (!std::isfinite(result.value))
      continue;
    if (!best || result.value < best->value)
      best = result;
  }
  if (!best)
    throw NumericalError("fit_gp: every restart failed to factorize the covariance matrix");

  return ForwardGpModel(inputs, targets, unpack_kernel(best->x, dim), std::exp(best->x[dim + 1]), offset, scale);
}

Prediction ForwardGpModel::predict(const MatrixXd& queries) const
{
  if (queries.cols() != inputs_.cols())
    throw DimensionError("predict: query dimension does not match the training inputs");
  const MatrixXd ks = kernel_matrix(kernel_, queries, inputs_);
  Prediction out;
  out.mean = (ks * alpha_).array() * y_scale_ + y_offset_;
  const MatrixXd v = factor_.llt().matrixL().solve(ks.transpose());
  const VectorXd latent = (kernel_.signal_variance - v.colwise().squaredNorm().transpose().array()).max(0.0);
  out.variance = latent * (y_scale_ * y_scale_);
  return out;
}

PointPrediction ForwardGpModel::predict_with_gradient(const VectorXd& x) const
{
  if (x.size() != inputs_.cols())
    throw DimensionError("predict: query dimension does not match the training inputs");
  const VectorXd k = kernel_matrix(kernel_, x.transpose(), inputs_).transpose();
  const VectorXd inv_l2 = kernel_.lengthscales.array().square().inverse();
  // dk_i/dx = -k_i (x - x_i) / l^2, one column per training point
  const MatrixXd scaled = (inputs_.rowwise() - x.transpose()).array().rowwise() * inv_l2.transpose().array();
  const MatrixXd dk = scaled.transpose() * k.asDiagonal();
  const VectorXd ak = factor_.solve(k);
  PointPrediction out;
  out.mean = k.dot(alpha_) * y_scale_ + y_offset_;
  out.variance = std::max(kernel_.signal_variance - k.dot(ak), 0.0) * y_scale_ * y_scale_;
  out.d_mean = dk * alpha_ * y_scale_;
  out.d_variance = -2.0 * (dk * ak) * y_scale_ * y_scale_;
  return out;
}

void to_json(nlohmann::json& j, const ForwardGpModel& model)
{
  j = nlohmann::json{{"kernel", model.kernel()},
                     {"noise_variance", model.noise_variance()},
                     {"y_offset", model.y_offset()},
                     {"y_scale", model.y_scale()},
                     {"inputs", matrix_to_json(model.inputs())},
                     {"targets", vector_to_json(model.targets())}};
}

void from_json(const nlohmann::json& j, ForwardGpModel& model)
{
  model = ForwardGpModel(matrix_from_json(j.at("inputs")), vector_from_json(j.at("targets")),
                         j.at("kernel").get<KernelParams>(), j.at("noise_variance").get<double>(),
                         j.value("y_offset", 0.0), j.value("y_scale", 1.0));
}

} // namespace invtransfer
