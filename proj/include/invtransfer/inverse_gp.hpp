#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include <json.hpp>

#include "invtransfer/gp.hpp"

namespace invtransfer {

/// Tolerance on sum(w) = 1 and w >= 0 for preference-vector queries.
inline constexpr double kSimplexTolerance = 1e-6;

/// Throws DomainError unless `w` lies on the probability simplex.
void require_simplex(const VectorXd& w, double tolerance = kSimplexTolerance);

enum class TrainingMode { TwoStep, Joint };

const char* to_string(TrainingMode mode);
TrainingMode training_mode_from_string(const std::string& name);

struct InverseTrainConfig {
  /// Floor on the target noise standard deviation.
  double sigma0 = 0.01;
  /// Starts for the target-only (or joint) likelihood.
  int restarts = 3;
  /// Starts for the transfer step; the first is always rho = 0.
  int transfer_restarts = 2;
  int max_iterations = 60;
  TrainingMode mode = TrainingMode::TwoStep;
  std::uint64_t seed = 0;
  HyperBounds bounds;
  /// Lower bound on the source noise variance.
  double min_source_noise_variance = 1e-6;
  /// |rho| bound; tanh(8) differs from 1 by 2e-7.
  double max_abs_rho = 8.0;
};

struct VariablePrediction {
  double mean = 0.0;
  /// Latent (noise-free) posterior variance, clamped at zero.
  double variance = 0.0;
};

/// Zero-transfer inverse model w -> x_j over the target data alone. The prior
/// mean is the sample mean of the training column.
class InverseGpModel {
public:
  InverseGpModel() = default;
  InverseGpModel(int var_index, MatrixXd w, VectorXd x, KernelParams kernel, double noise_variance, double offset);

  /// One data point yields the constant predictor at that point's value.
  static InverseGpModel fit(int var_index, const MatrixXd& w, const VectorXd& x, const InverseTrainConfig& config = {});

  VariablePrediction predict(const VectorXd& w) const;
  Prediction predict_batch(const MatrixXd& w) const;

  int var_index() const { return var_index_; }
  const KernelParams& kernel() const { return kernel_; }
  double noise_variance() const { return noise_variance_; }
  double offset() const { return offset_; }
  const MatrixXd& inputs() const { return w_; }
  const VectorXd& targets() const { return x_; }

private:
  int var_index_ = 0;
  MatrixXd w_;
  VectorXd x_;
  KernelParams kernel_;
  double noise_variance_ = 1e-4;
  double offset_ = 0.0;
  JitteredCholesky factor_;
  VectorXd alpha_;
};

/// Transfer Gram matrix [[K_SS, lambda K_ST], [lambda K_TS, K_TT]].
MatrixXd build_transfer_gram(const KernelParams& kernel, double lambda, const MatrixXd& w_source,
                             const MatrixXd& w_target);

/// Dense joint log likelihood of the stacked (already offset) targets under the
/// transfer Gram plus diag(source_noise, target_noise); constant term omitted.
double transfer_log_likelihood(const KernelParams& kernel, double lambda, double source_noise_variance,
                               double target_noise_variance, const MatrixXd& w_source, const VectorXd& y_source,
                               const MatrixXd& w_target, const VectorXd& y_target);

/// transfer_log_likelihood with its gradient in
/// [log sv, log l_1..l_m, log target_noise, rho, log source_noise], lambda = tanh(rho).
LikelihoodEval transfer_log_likelihood_with_gradient(const KernelParams& kernel, double lambda,
                                                     double source_noise_variance, double target_noise_variance,
                                                     const MatrixXd& w_source, const VectorXd& y_source,
                                                     const MatrixXd& w_target, const VectorXd& y_target);

/// Joint likelihood restricted to (lambda, source noise) with the kernel and
/// target noise frozen. Factorizes K_SS once; each evaluation costs
/// O(N_S N_T^2 + N_T^3) through the Schur complement on the target block.
class TransferLikelihood {
public:
  TransferLikelihood(const KernelParams& kernel, double target_noise_variance, const MatrixXd& w_source,
                     const VectorXd& y_source, const MatrixXd& w_target, const VectorXd& y_target);

  struct Eval {
    double value = 0.0;
    double d_lambda = 0.0;
    double d_source_noise = 0.0;
  };

  /// Throws NumericalError if the Schur complement is not positive definite.
  Eval evaluate(double lambda, double source_noise_variance) const;

private:
  VectorXd eig_;
  VectorXd a_;
  MatrixXd b_;
  MatrixXd d_;
  VectorXd y_target_;
};

/// Inverse transfer GP for one overlapping decision variable. Both task
/// columns share one prior mean, the sample mean of the target column.
class InvTgpModel {
public:
  InvTgpModel() = default;
  InvTgpModel(int var_index, int source_index, MatrixXd w_source, VectorXd x_source, MatrixXd w_target,
              VectorXd x_target, KernelParams kernel, double lambda, double source_noise_variance,
              double target_noise_variance, double offset);

  static InvTgpModel fit(int var_index, int source_index, const MatrixXd& w_source, const VectorXd& x_source,
                         const MatrixXd& w_target, const VectorXd& x_target, const InverseTrainConfig& config = {});

  VariablePrediction predict(const VectorXd& w) const;
  Prediction predict_batch(const MatrixXd& w) const;

  int var_index() const { return var_index_; }
  int source_index() const { return source_index_; }
  const KernelParams& kernel() const { return kernel_; }
  double lambda() const { return lambda_; }
  double source_noise_variance() const { return source_noise_variance_; }
  double target_noise_variance() const { return target_noise_variance_; }
  double offset() const { return offset_; }
  TrainingMode mode() const { return mode_; }
  void set_mode(TrainingMode mode) { mode_ = mode; }
  const MatrixXd& source_inputs() const { return w_source_; }
  const VectorXd& source_targets() const { return x_source_; }
  const MatrixXd& target_inputs() const { return w_target_; }
  const VectorXd& target_targets() const { return x_target_; }
  double log_likelihood() const { return log_likelihood_; }

private:
  int var_index_ = 0;
  int source_index_ = 0;
  MatrixXd w_source_;
  VectorXd x_source_;
  MatrixXd w_target_;
  VectorXd x_target_;
  KernelParams kernel_;
  double lambda_ = 0.0;
  double source_noise_variance_ = 1e-4;
  double target_noise_variance_ = 1e-4;
  double offset_ = 0.0;
  TrainingMode mode_ = TrainingMode::TwoStep;
  JitteredCholesky factor_;
  VectorXd alpha_;
  double log_likelihood_ = 0.0;
};

using VariableModel = std::variant<InverseGpModel, InvTgpModel>;

int var_index(const VariableModel& model);
VariablePrediction predict(const VariableModel& model, const VectorXd& w);

struct SolutionDistribution {
  VectorXd mean;
  VectorXd variance;
};

/// Stacks the per-variable predictions into the factorized Gaussian over
/// decision vectors. `models` must contain exactly one model for each index
/// 0..d-1, in any order; otherwise ConfigError.
SolutionDistribution predict_solution_distribution(const std::vector<VariableModel>& models, const VectorXd& w);

void to_json(nlohmann::json& j, const InverseGpModel& model);
void from_json(const nlohmann::json& j, InverseGpModel& model);
void to_json(nlohmann::json& j, const InvTgpModel& model);
void from_json(const nlohmann::json& j, InvTgpModel& model);
void to_json(nlohmann::json& j, const VariableModel& model);
void from_json(const nlohmann::json& j, VariableModel& model);

} // namespace invtransfer
