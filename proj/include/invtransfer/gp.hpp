#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <json.hpp>

namespace invtransfer {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Squared-exponential ARD kernel parameters.
struct KernelParams {
  double signal_variance = 1.0;
  VectorXd lengthscales;

  int dim() const { return static_cast<int>(lengthscales.size()); }
  static KernelParams isotropic(int dim, double lengthscale, double signal_variance = 1.0);
};

void to_json(nlohmann::json& j, const KernelParams& params);
void from_json(const nlohmann::json& j, KernelParams& params);

/// signal_variance * exp(-1/2 sum_j ((a_j - b_j) / l_j)^2)
double kernel_eval(const KernelParams& params, const VectorXd& a, const VectorXd& b);

/// Cross-covariance between the rows of `a` and the rows of `b`.
MatrixXd kernel_matrix(const KernelParams& params, const MatrixXd& a, const MatrixXd& b);
MatrixXd kernel_matrix(const KernelParams& params, const MatrixXd& a);

/// Cholesky factorization with the escalating jitter policy: retry with
/// 1e-10 * mean(diag) added to the diagonal, growing x10 up to 1e-4 * mean(diag).
/// Throws NumericalError when every attempt fails.
class JitteredCholesky {
public:
  JitteredCholesky() = default;
  explicit JitteredCholesky(const MatrixXd& matrix);

  const Eigen::LLT<MatrixXd>& llt() const { return llt_; }
  MatrixXd lower() const { return llt_.matrixL(); }
  double jitter() const { return jitter_; }
  double log_determinant() const;
  VectorXd solve(const VectorXd& rhs) const { return llt_.solve(rhs); }
  MatrixXd inverse() const;

private:
  Eigen::LLT<MatrixXd> llt_;
  double jitter_ = 0.0;
};

/// log-space packing used by every optimizer: [log sv, log l_1..l_d, log noise...].
VectorXd pack_log(const KernelParams& kernel, double noise_variance);
KernelParams unpack_kernel(const VectorXd& theta, int dim);

/// -1/2 y^T (K + s2 I)^-1 y - 1/2 log|K + s2 I|; the -N/2 log 2pi constant is omitted.
double log_marginal_likelihood(const MatrixXd& inputs, const VectorXd& targets, const KernelParams& kernel,
                               double noise_variance);

struct LikelihoodEval {
  double value = 0.0;
  /// Derivatives with respect to pack_log(kernel, noise_variance).
  VectorXd gradient;
};

LikelihoodEval log_marginal_likelihood_with_gradient(const MatrixXd& inputs, const VectorXd& targets,
                                                     const KernelParams& kernel, double noise_variance);

struct HyperBounds {
  double min_lengthscale = 1e-3;
  double max_lengthscale = 1e3;
  double min_signal_variance = 1e-4;
  double max_signal_variance = 1e2;
  double min_noise_variance = 1e-8;
  double max_noise_variance = 1.0;
};

/// How targets are transformed before fitting: Standardize realizes a
/// constant-mean prior with unit-variance scaling, Center only removes the mean.
enum class TargetTransform { None, Center, Standardize };

struct TrainConfig {
  int restarts = 5;
  int max_iterations = 100;
  HyperBounds bounds;
  std::uint64_t seed = 0;
  /// Replaces the default first start; random restarts still follow.
  std::optional<KernelParams> warm_kernel;
  std::optional<double> warm_noise;
  TargetTransform transform = TargetTransform::Standardize;
};

struct Prediction {
  VectorXd mean;
  VectorXd variance;
};

/// Single-point prediction with input gradients of the mean and the latent variance.
struct PointPrediction {
  double mean = 0.0;
  double variance = 0.0;
  VectorXd d_mean;
  VectorXd d_variance;
};

/// Exact GP regression over (decision vector -> scalar) with a constant mean
/// realized by target standardization. Immutable once constructed.
class ForwardGpModel {
public:
  ForwardGpModel() = default;
  /// Builds the factorization for fixed hyperparameters. Targets are raw;
  /// the kernel and noise act on (y - y_offset) / y_scale.
  ForwardGpModel(MatrixXd inputs, VectorXd targets, KernelParams kernel, double noise_variance,
                 double y_offset = 0.0, double y_scale = 1.0);

  /// Maximizes the log marginal likelihood by multi-start L-BFGS in log space.
  static ForwardGpModel fit(const MatrixXd& inputs, const VectorXd& targets, const TrainConfig& config = {});

  Prediction predict(const MatrixXd& queries) const;
  PointPrediction predict_with_gradient(const VectorXd& x) const;

  const KernelParams& kernel() const { return kernel_; }
  double noise_variance() const { return noise_variance_; }
  const MatrixXd& inputs() const { return inputs_; }
  const VectorXd& targets() const { return targets_; }
  double y_offset() const { return y_offset_; }
  double y_scale() const { return y_scale_; }
  const JitteredCholesky& factor() const { return factor_; }
  const VectorXd& alpha() const { return alpha_; }
  /// Log marginal likelihood of the standardized targets at the held parameters.
  double log_likelihood() const { return log_likelihood_; }

private:
  MatrixXd inputs_;
  VectorXd targets_;
  KernelParams kernel_;
  double noise_variance_ = 1e-6;
  double y_offset_ = 0.0;
  double y_scale_ = 1.0;
  JitteredCholesky factor_;
  VectorXd alpha_;
  double log_likelihood_ = 0.0;
};

void to_json(nlohmann::json& j, const ForwardGpModel& model);
void from_json(const nlohmann::json& j, ForwardGpModel& model);

/// Helpers shared with the inverse models.
nlohmann::json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const VectorXd& v);
VectorXd vector_from_json(const nlohmann::json& j);

} // namespace invtransfer
