#include "invtransfer/inverse_gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "invtransfer/errors.hpp"
#include "invtransfer/lbfgs.hpp"

namespace invtransfer {

void require_simplex(const VectorXd& w, double tolerance)
{
  if (!w.allFinite())
    throw DomainError("preference vector has non-finite components");
  if (w.minCoeff() < -tolerance || std::abs(w.sum() - 1.0) > tolerance)
    throw DomainError("preference vector is not on the simplex (sum " + std::to_string(w.sum()) + ")");
}

namespace {

void require_simplex_rows(const MatrixXd& w)
{
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    require_simplex(w.row(i).transpose());
}

TrainConfig target_step_config(const InverseTrainConfig& config)
{
  TrainConfig tc;
  tc.restarts = std::max(1, config.restarts);
  tc.max_iterations = config.max_iterations;
  tc.bounds = config.bounds;
  tc.bounds.min_noise_variance = std::max(config.bounds.min_noise_variance, config.sigma0 * config.sigma0);
  tc.bounds.max_noise_variance = std::max(tc.bounds.max_noise_variance, tc.bounds.min_noise_variance);
  tc.seed = config.seed;
  tc.transform = TargetTransform::Center;
  return tc;
}

double floored_noise(double noise, double sigma0) { return std::max(noise, sigma0 * sigma0); }

} // namespace

const char* to_string(TrainingMode mode) { return mode == TrainingMode::TwoStep ? "two-step" : "joint"; }

TrainingMode training_mode_from_string(const std::string& name)
{
  if (name == "two-step")
    return TrainingMode::TwoStep;
  if (name == "joint")
    return TrainingMode::Joint;
  throw ConfigError("unknown training mode '" + name + "' (expected two-step or joint)");
}

// ---------------------------------------------------------------------------

InverseGpModel::InverseGpModel(int var_index, MatrixXd w, VectorXd x, KernelParams kernel, double noise_variance,
                               double offset)
    : var_index_(var_index), w_(std::move(w)), x_(std::move(x)), kernel_(std::move(kernel)),
      noise_variance_(noise_variance), offset_(offset)
{
  if (w_.rows() < 1 || w_.rows() != x_.size())
    throw DomainError("inverse GP: need at least one (w, x) pair");
  if (w_.cols() != kernel_.dim())
    throw DimensionError("inverse GP: kernel dimension does not match preference dimension");
  MatrixXd a = kernel_matrix(kernel_, w_);
  a.diagonal().array() += noise_variance_;
  factor_ = JitteredCholesky(a);
  alpha_ = factor_.solve((x_.array() - offset_).matrix());
}

InverseGpModel InverseGpModel::fit(int var_index, const MatrixXd& w, const VectorXd& x,
                                   const InverseTrainConfig& config)
{
  if (w.rows() < 1 || w.rows() != x.size())
    throw DomainError("fit_inverse_gp: empty or mismatched target data");
  require_simplex_rows(w);
  const int m = static_cast<int>(w.cols());
  const double floor = config.sigma0 * config.sigma0;
  if (w.rows() == 1) {
    const double sv = std::max(floor, config.bounds.min_signal_variance);
    return InverseGpModel(var_index, w, x, KernelParams::isotropic(m, 0.5, sv), floor, x[0]);
  }
  const ForwardGpModel gp = ForwardGpModel::fit(w, x, target_step_config(config));
  return InverseGpModel(var_index, w, x, gp.kernel(), floored_noise(gp.noise_variance(), config.sigma0),
                        gp.y_offset());
}

VariablePrediction InverseGpModel::predict(const VectorXd& w) const
{
  require_simplex(w);
  const Prediction p = predict_batch(w.transpose());
  return {p.mean[0], p.variance[0]};
}

Prediction InverseGpModel::predict_batch(const MatrixXd& w) const
{
  if (w.cols() != w_.cols())
    throw DimensionError("inverse GP predict: preference dimension mismatch");
  const MatrixXd ks = kernel_matrix(kernel_, w, w_);
  Prediction out;
  out.mean = (ks * alpha_).array() + offset_;
  const MatrixXd v = factor_.llt().matrixL().solve(ks.transpose());
  out.variance = (kernel_.signal_variance - v.colwise().squaredNorm().transpose().array()).max(0.0);
  return out;
}

// ---------------------------------------------------------------------------

MatrixXd build_transfer_gram(const KernelParams& kernel, double lambda, const MatrixXd& w_source,
                             const MatrixXd& w_target)
{
  if (!(std::abs(lambda) <= 1.0))
    throw DomainError("transfer gram: |lambda| must not exceed 1");
  const Eigen::Index ns = w_source.rows();
  const Eigen::Index nt = w_target.rows();
  MatrixXd g(ns + nt, ns + nt);
  g.topLeftCorner(ns, ns) = kernel_matrix(kernel, w_source);
  g.bottomRightCorner(nt, nt) = kernel_matrix(kernel, w_target);
  const MatrixXd cross = lambda * kernel_matrix(kernel, w_source, w_target);
  g.topRightCorner(ns, nt) = cross;
  g.bottomLeftCorner(nt, ns) = cross.transpose();
  return g;
}

namespace {

MatrixXd noisy_transfer_gram(const KernelParams& kernel, double lambda, double source_noise, double target_noise,
                             const MatrixXd& w_source, const MatrixXd& w_target)
{
  MatrixXd a = build_transfer_gram(kernel, lambda, w_source, w_target);
  const Eigen::Index ns = w_source.rows();
  a.diagonal().head(ns).array() += source_noise;
  a.diagonal().tail(w_target.rows()).array() += target_noise;
  return a;
}

VectorXd stack(const VectorXd& top, const VectorXd& bottom)
{
  VectorXd out(top.size() + bottom.size());
  out << top, bottom;
  return out;
}

MatrixXd stack_rows(const MatrixXd& top, const MatrixXd& bottom)
{
  MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

// Dense joint likelihood with gradient in
// [log sv, log l_1..l_m, log target_noise, rho, log source_noise].
LikelihoodEval joint_likelihood_with_gradient(const KernelParams& kernel, double lambda, double source_noise,
                                              double target_noise, const MatrixXd& w_all, Eigen::Index ns,
                                              const VectorXd& y)
{
  const Eigen::Index n = w_all.rows();
  const Eigen::Index nt = n - ns;
  const int m = kernel.dim();
  const MatrixXd k = kernel_matrix(kernel, w_all);
  MatrixXd kl = k;
  kl.topRightCorner(ns, nt) *= lambda;
  kl.bottomLeftCorner(nt, ns) *= lambda;
  MatrixXd a = kl;
  a.diagonal().head(ns).array() += source_noise;
  a.diagonal().tail(nt).array() += target_noise;
  const JitteredCholesky factor(a);
  const VectorXd alpha = factor.solve(y);

  LikelihoodEval out;
  out.value = -0.5 * y.dot(alpha) - 0.5 * factor.log_determinant();
  const MatrixXd w = alpha * alpha.transpose() - factor.inverse();
  const MatrixXd wk = w.cwiseProduct(kl);
  out.gradient.resize(m + 4);
  out.gradient[0] = 0.5 * wk.sum();
  for (int j = 0; j < m; ++j) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < n; ++c)
      for (Eigen::Index r = c + 1; r < n; ++r) {
        const double diff = w_all(r, j) - w_all(c, j);
        acc += wk(r, c) * diff * diff;
      }
    out.gradient[1 + j] = acc / (kernel.lengthscales[j] * kernel.lengthscales[j]);
  }
  out.gradient[m + 1] = 0.5 * target_noise * w.diagonal().tail(nt).sum();
  const double cross = w.topRightCorner(ns, nt).cwiseProduct(k.topRightCorner(ns, nt)).sum();
  out.gradient[m + 2] = cross * (1.0 - lambda * lambda);
  out.gradient[m + 3] = 0.5 * source_noise * w.diagonal().head(ns).sum();
  return out;
}

} // namespace

double transfer_log_likelihood(const KernelParams& kernel, double lambda, double source_noise_variance,
                               double target_noise_variance, const MatrixXd& w_source, const VectorXd& y_source,
                               const MatrixXd& w_target, const VectorXd& y_target)
{
  if (w_source.rows() != y_source.size() || w_target.rows() != y_target.size())
    throw DimensionError("transfer likelihood: inputs and targets disagree in length");
  const MatrixXd a =
      noisy_transfer_gram(kernel, lambda, source_noise_variance, target_noise_variance, w_source, w_target);
  const JitteredCholesky factor(a);
  const VectorXd y = stack(y_source, y_target);
  return -0.5 * y.dot(factor.solve(y)) - 0.5 * factor.log_determinant();
}

LikelihoodEval transfer_log_likelihood_with_gradient(const KernelParams& kernel, double lambda,
                                                     double source_noise_variance, double target_noise_variance,
                                                     const MatrixXd& w_source, const VectorXd& y_source,
                                                     const MatrixXd& w_target, const VectorXd& y_target)
{
  if (w_source.rows() != y_source.size() || w_target.rows() != y_target.size())
    throw DimensionError("transfer likelihood: inputs and targets disagree in length");
  if (!(std::abs(lambda) <= 1.0))
    throw DomainError("transfer gram: |lambda| must not exceed 1");
  return joint_likelihood_with_gradient(kernel, lambda, source_noise_variance, target_noise_variance,
                                        stack_rows(w_source, w_target), w_source.rows(),
                                        stack(y_source, y_target));
}

TransferLikelihood::TransferLikelihood(const KernelParams& kernel, double target_noise_variance,
                                       const MatrixXd& w_source, const VectorXd& y_source, const MatrixXd& w_target,
                                       const VectorXd& y_target)
    : y_target_(y_target)
{
  if (w_source.rows() != y_source.size() || w_target.rows() != y_target.size())
    throw DimensionError("transfer likelihood: inputs and targets disagree in length");
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(kernel_matrix(kernel, w_source));
  if (eig.info() != Eigen::Success)
    throw NumericalError("transfer likelihood: eigendecomposition of the source block failed");
  eig_ = eig.eigenvalues().cwiseMax(0.0);
  const MatrixXd& u = eig.eigenvectors();
  a_ = u.transpose() * y_source;
  b_ = u.transpose() * kernel_matrix(kernel, w_source, w_target);
  d_ = kernel_matrix(kernel, w_target);
  d_.diagonal().array() += target_noise_variance;
}

TransferLikelihood::Eval TransferLikelihood::evaluate(double lambda, double source_noise_variance) const
{
  // With K_SS = U E U^T and h = 1 / (e + s):
  //   S = D - lambda^2 B^T diag(h) B,  r = y_T - lambda B^T (h .* a)
  //   log|M| = sum log(e + s) + log|S|,  y^T M^-1 y = sum h a^2 + r^T S^-1 r
  const VectorXd e_s = eig_.array() + source_noise_variance;
  const VectorXd h = e_s.cwiseInverse();
  const VectorXd h2 = h.cwiseAbs2();
  const MatrixXd hb = h.asDiagonal() * b_;
  const MatrixXd g = b_.transpose() * hb;
  const MatrixXd g2 = b_.transpose() * (h.asDiagonal() * hb);
  const VectorXd u = b_.transpose() * h.cwiseProduct(a_);
  const VectorXd u2 = b_.transpose() * h2.cwiseProduct(a_);
  const double l2 = lambda * lambda;

  const MatrixXd s = d_ - l2 * g;
  const Eigen::LLT<MatrixXd> llt(s);
  if (llt.info() != Eigen::Success)
    throw NumericalError("transfer likelihood: Schur complement is not positive definite");
  const VectorXd r = y_target_ - lambda * u;
  const VectorXd z = llt.solve(r);
  const MatrixXd s_inv = llt.solve(MatrixXd::Identity(s.rows(), s.cols()));

  const double quad = h.dot(a_.cwiseAbs2()) + r.dot(z);
  const double logdet = e_s.array().log().sum() + 2.0 * llt.matrixLLT().diagonal().array().log().sum();

  const double dquad_dl = -2.0 * z.dot(u) + 2.0 * lambda * z.dot(g * z);
  const double dquad_ds = -h2.dot(a_.cwiseAbs2()) + 2.0 * lambda * z.dot(u2) - l2 * z.dot(g2 * z);
  const double dlogdet_dl = -2.0 * lambda * s_inv.cwiseProduct(g).sum();
  const double dlogdet_ds = h.sum() + l2 * s_inv.cwiseProduct(g2).sum();

  Eval out;
  out.value = -0.5 * (quad + logdet);
  out.d_lambda = -0.5 * (dquad_dl + dlogdet_dl);
  out.d_source_noise = -0.5 * (dquad_ds + dlogdet_ds);
  return out;
}

// ---------------------------------------------------------------------------

InvTgpModel::InvTgpModel(int var_index, int source_index, MatrixXd w_source, VectorXd x_source, MatrixXd w_target,
                         VectorXd x_target, KernelParams kernel, double lambda, double source_noise_variance,
                         double target_noise_variance, double offset)
    : var_index_(var_index), source_index_(source_index), w_source_(std::move(w_source)),
      x_source_(std::move(x_source)), w_target_(std::move(w_target)), x_target_(std::move(x_target)),
      kernel_(std::move(kernel)), lambda_(lambda), source_noise_variance_(source_noise_variance),
      target_noise_variance_(target_noise_variance), offset_(offset)
{
  if (w_target_.rows() < 1 || w_target_.rows() != x_target_.size())
    throw DomainError("invTGP: empty or mismatched target data");
  if (w_source_.rows() != x_source_.size())
    throw DimensionError("invTGP: source inputs and targets disagree in length");
  if (w_source_.cols() != w_target_.cols() || w_target_.cols() != kernel_.dim())
    throw DimensionError("invTGP: preference dimension mismatch");
  const MatrixXd a = noisy_transfer_gram(kernel_, lambda_, source_noise_variance_, target_noise_variance_,
                                         w_source_, w_target_);
  factor_ = JitteredCholesky(a);
  const VectorXd y = stack(x_source_, x_target_).array() - offset_;
  alpha_ = factor_.solve(y);
  log_likelihood_ = -0.5 * y.dot(alpha_) - 0.5 * factor_.log_determinant();
}

InvTgpModel InvTgpModel::fit(int var_index, int source_index, const MatrixXd& w_source, const VectorXd& x_source,
                             const MatrixXd& w_target, const VectorXd& x_target, const InverseTrainConfig& config)
{
  if (w_target.rows() < 2 || w_target.rows() != x_target.size())
    throw DomainError("fit_invtgp: need at least two target points");
  if (w_source.rows() < 1 || w_source.rows() != x_source.size())
    throw DomainError("fit_invtgp: need at least one source point");
  if (w_source.cols() != w_target.cols())
    throw DimensionError("fit_invtgp: source and target preference dimensions differ");
  require_simplex_rows(w_source);
  require_simplex_rows(w_target);

  const int m = static_cast<int>(w_target.cols());
  const double floor = config.sigma0 * config.sigma0;

  // step 1: target-only likelihood over the kernel and target noise
  const ForwardGpModel target_only = ForwardGpModel::fit(w_target, x_target, target_step_config(config));
  const KernelParams kernel = target_only.kernel();
  const double target_noise = floored_noise(target_only.noise_variance(), config.sigma0);
  const double offset = target_only.y_offset();
  const VectorXd y_source = x_source.array() - offset;
  const VectorXd y_target = x_target.array() - offset;

  const double min_s = std::log(config.min_source_noise_variance);
  const double max_s = std::log(std::max(config.bounds.max_noise_variance, config.min_source_noise_variance));
  const double s_start = std::clamp(std::log(target_noise), min_s, max_s);
  const double rho_starts[] = {0.0, 1.5, -1.5};
  const int n_transfer = std::clamp(config.transfer_restarts, 1, 3);

  LbfgsOptions options;
  options.max_iterations = config.max_iterations;

  if (config.mode == TrainingMode::TwoStep) {
    // step 2: only (rho, log source noise); the kernel and target noise stay frozen
    const TransferLikelihood likelihood(kernel, target_noise, w_source, y_source, w_target, y_target);
    const Objective objective = [&](const VectorXd& theta, VectorXd& grad) -> double {
      const double lambda = std::tanh(theta[0]);
      const double s = std::exp(theta[1]);
      grad.resize(2);
      try {
        const TransferLikelihood::Eval e = likelihood.evaluate(lambda, s);
        grad[0] = -e.d_lambda * (1.0 - lambda * lambda);
        grad[1] = -e.d_source_noise * s;
        return -e.value;
      } catch (const NumericalError&) {
        grad.setZero();
        return std::numeric_limits<double>::infinity();
      }
    };
    const VectorXd lower = (VectorXd(2) << -config.max_abs_rho, min_s).finished();
    const VectorXd upper = (VectorXd(2) << config.max_abs_rho, max_s).finished();
    std::optional<LbfgsResult> best;
    for (int i = 0; i < n_transfer; ++i) {
      const LbfgsResult r = minimize_lbfgs(objective, (VectorXd(2) << rho_starts[i], s_start).finished(), lower,
                                           upper, options);
      if (std::isfinite(r.value) && (!best || r.value < best->value))
        best = r;
    }
    if (!best)
      throw NumericalError("fit_invtgp: every transfer start failed to factorize");
    InvTgpModel model(var_index, source_index, w_source, x_source, w_target, x_target, kernel,
                      std::tanh(best->x[0]), std::exp(best->x[1]), target_noise, offset);
    model.mode_ = TrainingMode::TwoStep;
    return model;
  }

  // joint: every parameter on the joint likelihood, started from the step-1 solution
  const MatrixXd w_all = stack_rows(w_source, w_target);
  const VectorXd y_all = stack(y_source, y_target);
  const Eigen::Index ns = w_source.rows();
  const HyperBounds& b = config.bounds;
  VectorXd lower(m + 4);
  VectorXd upper(m + 4);
  lower[0] = std::log(b.min_signal_variance);
  upper[0] = std::log(b.max_signal_variance);
  lower.segment(1, m).setConstant(std::log(b.min_lengthscale));
  upper.segment(1, m).setConstant(std::log(b.max_lengthscale));
  lower[m + 1] = std::log(std::max(b.min_noise_variance, floor));
  upper[m + 1] = std::log(std::max(b.max_noise_variance, floor));
  lower[m + 2] = -config.max_abs_rho;
  upper[m + 2] = config.max_abs_rho;
  lower[m + 3] = min_s;
  upper[m + 3] = max_s;

  const Objective objective = [&](const VectorXd& theta, VectorXd& grad) -> double {
    try {
      const KernelParams k = unpack_kernel(theta, m);
      const LikelihoodEval e = joint_likelihood_with_gradient(k, std::tanh(theta[m + 2]), std::exp(theta[m + 3]),
                                                              std::exp(theta[m + 1]), w_all, ns, y_all);
      grad = -e.gradient;
      return -e.value;
    } catch (const NumericalError&) {
      grad = VectorXd::Zero(theta.size());
      return std::numeric_limits<double>::infinity();
    }
  };
  VectorXd start(m + 4);
  start.head(m + 2) = pack_log(kernel, target_noise);
  start[m + 3] = s_start;
  std::optional<LbfgsResult> best;
  for (int i = 0; i < n_transfer; ++i) {
    start[m + 2] = rho_starts[i];
    const LbfgsResult r = minimize_lbfgs(objective, start, lower, upper, options);
    if (std::isfinite(r.value) && (!best || r.value < best->value))
      best = r;
  }
  if (!best)
    throw NumericalError("fit_invtgp: every joint start failed to factorize");
  InvTgpModel model(var_index, source_index, w_source, x_source, w_target, x_target, unpack_kernel(best->x, m),
                    std::tanh(best->x[m + 2]), std::exp(best->x[m + 3]),
                    floored_noise(std::exp(best->x[m + 1]), config.sigma0), offset);
  model.mode_ = TrainingMode::Joint;
  return model;
}

VariablePrediction InvTgpModel::predict(const VectorXd& w) const
{
  require_simplex(w);
  const Prediction p = predict_batch(w.transpose());
  return {p.mean[0], p.variance[0]};
}

Prediction InvTgpModel::predict_batch(const MatrixXd& w) const
{
  if (w.cols() != w_target_.cols())
    throw DimensionError("invTGP predict: preference dimension mismatch");
  const Eigen::Index ns = w_source_.rows();
  MatrixXd ks(w.rows(), ns + w_target_.rows());
  ks.leftCols(ns) = lambda_ * kernel_matrix(kernel_, w, w_source_);
  ks.rightCols(w_target_.rows()) = kernel_matrix(kernel_, w, w_target_);
  Prediction out;
  out.mean = (ks * alpha_).array() + offset_;
  const MatrixXd v = factor_.llt().matrixL().solve(ks.transpose());
  out.variance = (kernel_.signal_variance - v.colwise().squaredNorm().transpose().array()).max(0.0);
  return out;
}

// ---------------------------------------------------------------------------

int var_index(const VariableModel& model)
{
  return std::visit([](const auto& m) { return m.var_index(); }, model);
}

VariablePrediction predict(const VariableModel& model, const VectorXd& w)
{
  return std::visit([&](const auto& m) { return m.predict(w); }, model);
}

SolutionDistribution predict_solution_distribution(const std::vector<VariableModel>& models, const VectorXd& w)
{
  const int d = static_cast<int>(models.size());
  std::vector<const VariableModel*> by_index(d, nullptr);
  for (const VariableModel& model : models) {
    const int j = var_index(model);
    if (j < 0 || j >= d)
      throw ConfigError("model variable index " + std::to_string(j) + " outside 0.." + std::to_string(d - 1));
    if (by_index[j])
      throw ConfigError("two models for variable " + std::to_string(j));
    by_index[j] = &model;
  }
  require_simplex(w);
  SolutionDistribution out{VectorXd(d), VectorXd(d)};
  for (int j = 0; j < d; ++j) {
    const VariablePrediction p = predict(*by_index[j], w);
    out.mean[j] = p.mean;
    out.variance[j] = p.variance;
  }
  return out;
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const InverseGpModel& model)
{
  j = nlohmann::json{{"type", "inverse_gp"},
                     {"var_index", model.var_index()},
                     {"kernel", model.kernel()},
                     {"noise_variance", model.noise_variance()},
                     {"offset", model.offset()},
                     {"w", matrix_to_json(model.inputs())},
                     {"x", vector_to_json(model.targets())}};
}

void from_json(const nlohmann::json& j, InverseGpModel& model)
{
  model = InverseGpModel(j.at("var_index").get<int>(), matrix_from_json(j.at("w")), vector_from_json(j.at("x")),
                         j.at("kernel").get<KernelParams>(), j.at("noise_variance").get<double>(),
                         j.at("offset").get<double>());
}

void to_json(nlohmann::json& j, const InvTgpModel& model)
{
  j = nlohmann::json{{"type", "inv_tgp"},
                     {"var_index", model.var_index()},
                     {"source_index", model.source_index()},
                     {"mode", to_string(model.mode())},
                     {"kernel", model.kernel()},
                     {"lambda", model.lambda()},
                     {"source_noise_variance", model.source_noise_variance()},
                     {"target_noise_variance", model.target_noise_variance()},
                     {"offset", model.offset()},
                     {"source_w", matrix_to_json(model.source_inputs())},
                     {"source_x", vector_to_json(model.source_targets())},
                     {"target_w", matrix_to_json(model.target_inputs())},
                     {"target_x", vector_to_json(model.target_targets())}};
}

void from_json(const nlohmann::json& j, InvTgpModel& model)
{
  model = InvTgpModel(j.at("var_index").get<int>(), j.at("source_index").get<int>(),
                      matrix_from_json(j.at("source_w")), vector_from_json(j.at("source_x")),
                      matrix_from_json(j.at("target_w")), vector_from_json(j.at("target_x")),
                      j.at("kernel").get<KernelParams>(), j.at("lambda").get<double>(),
                      j.at("source_noise_variance").get<double>(), j.at("target_noise_variance").get<double>(),
                      j.at("offset").get<double>());
  model.set_mode(training_mode_from_string(j.value("mode", std::string("two-step"))));
}

void to_json(nlohmann::json& j, const VariableModel& model)
{
  std::visit([&](const auto& m) { to_json(j, m); }, model);
}

void from_json(const nlohmann::json& j, VariableModel& model)
{
  const std::string type = j.at("type").get<std::string>();
  if (type == "inverse_gp")
    model = j.get<InverseGpModel>();
  else if (type == "inv_tgp")
    model = j.get<InvTgpModel>();
  else
    throw ParseError("unknown inverse model type '" + type + "'");
}

} // namespace invtransfer
