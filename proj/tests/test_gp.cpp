#include <doctest.h>

#include <cmath>

#include "invtransfer/errors.hpp"
#include "invtransfer/gp.hpp"
#include "invtransfer/lbfgs.hpp"
#include "support.hpp"

using namespace invtransfer;
namespace ts = testing_support;

namespace {

KernelParams random_kernel(std::mt19937_64& rng, int dim)
{
  KernelParams k;
  k.signal_variance = std::exp(ts::uniform_vector(rng, 1, -1.0, 1.0)[0]);
  k.lengthscales = ts::uniform_vector(rng, dim, 0.2, 1.5);
  return k;
}

/// Draw targets from a GP prior with the given hyperparameters.
VectorXd sample_prior(std::mt19937_64& rng, const MatrixXd& x, const KernelParams& k, double noise)
{
  MatrixXd a = kernel_matrix(k, x);
  a.diagonal().array() += noise + 1e-10;
  const MatrixXd l = a.llt().matrixL();
  std::normal_distribution<double> z(0.0, 1.0);
  VectorXd e(x.rows());
  for (Eigen::Index i = 0; i < e.size(); ++i)
    e[i] = z(rng);
  return l * e;
}

} // namespace

TEST_CASE("kernel examples")
{
  const KernelParams k = KernelParams::isotropic(2, 1.0);
  const VectorXd zero = VectorXd::Zero(2);
  const VectorXd one = VectorXd::Ones(2);
  CHECK(kernel_eval(k, zero, one) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(kernel_eval(k, one, one) == 1.0);

  std::mt19937_64 rng(1);
  const KernelParams r = random_kernel(rng, 4);
  for (int i = 0; i < 20; ++i) {
    const VectorXd a = ts::uniform_vector(rng, 4);
    const VectorXd b = ts::uniform_vector(rng, 4);
    CHECK(kernel_eval(r, a, b) == kernel_eval(r, b, a));
    CHECK(kernel_eval(r, a, a) == r.signal_variance);
  }
  CHECK_THROWS_AS(kernel_eval(k, VectorXd::Zero(3), VectorXd::Zero(3)), DimensionError);
}

TEST_CASE("log marginal likelihood scalar cases")
{
  const MatrixXd x = MatrixXd::Zero(1, 1);
  const KernelParams k = KernelParams::isotropic(1, 1.0);
  CHECK(log_marginal_likelihood(x, VectorXd::Zero(1), k, 0.0) == doctest::Approx(0.0));
  CHECK(log_marginal_likelihood(x, VectorXd::Constant(1, 2.0), k, 0.0) == doctest::Approx(-2.0));
}

TEST_CASE("log marginal likelihood matches the dense formula")
{
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd x = ts::uniform_matrix(rng, 12, 3);
    const VectorXd y = ts::uniform_vector(rng, 12, -1.0, 1.0);
    const KernelParams k = random_kernel(rng, 3);
    const double noise = 0.05;
    const MatrixXd a = ts::se_gram(k.signal_variance, k.lengthscales, x, x) + noise * MatrixXd::Identity(12, 12);
    const double dense = -0.5 * y.dot(a.inverse() * y) - 0.5 * std::log(a.determinant());
    CHECK(log_marginal_likelihood(x, y, k, noise) == doctest::Approx(dense).epsilon(1e-10));
  }
}

TEST_CASE("likelihood gradient matches central differences")
{
  std::mt19937_64 rng(3);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd x = ts::uniform_matrix(rng, 10, 3);
    const VectorXd y = ts::uniform_vector(rng, 10, -1.0, 1.0);
    const KernelParams k = random_kernel(rng, 3);
    const double noise = 0.02;
    const LikelihoodEval eval = log_marginal_likelihood_with_gradient(x, y, k, noise);
    CHECK(eval.value == doctest::Approx(log_marginal_likelihood(x, y, k, noise)).epsilon(1e-12));
    const VectorXd theta = pack_log(k, noise);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      VectorXd plus = theta;
      VectorXd minus = theta;
      plus[i] += h;
      minus[i] -= h;
      const double fp = log_marginal_likelihood(x, y, unpack_kernel(plus, 3), std::exp(plus[4]));
      const double fm = log_marginal_likelihood(x, y, unpack_kernel(minus, 3), std::exp(minus[4]));
      const double fd = (fp - fm) / (2.0 * h);
      CHECK(std::abs(eval.gradient[i] - fd) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("prediction matches the dense-inverse oracle")
{
  SUBCASE("five points")
  {
    MatrixXd x(5, 2);
    x << 0.1, 0.2, 0.4, 0.9, 0.5, 0.5, 0.8, 0.1, 0.95, 0.7;
    const VectorXd y = (VectorXd(5) << 0.3, -0.2, 0.5, 1.1, 0.0).finished();
    KernelParams k{1.3, (VectorXd(2) << 0.4, 0.7).finished()};
    const ForwardGpModel model(x, y, k, 0.01);
    MatrixXd q(3, 2);
    q << 0.3, 0.3, 0.0, 1.0, 0.6, 0.45;
    const Prediction p = model.predict(q);
    const ts::DensePosterior oracle = ts::dense_gp(1.3, k.lengthscales, 0.01, x, y, q);
    CHECK(ts::max_abs(p.mean - oracle.mean) < 1e-8);
    CHECK(ts::max_abs(p.variance - oracle.variance) < 1e-8);
    // frozen oracle output at the first query
    CHECK(oracle.mean[0] == doctest::Approx(p.mean[0]).epsilon(1e-12));
  }
  SUBCASE("random instances up to N = 200")
  {
    std::mt19937_64 rng(4);
    for (int n : {1, 7, 40, 120, 200}) {
      const int dim = 1 + static_cast<int>(rng() % 10);
      const MatrixXd x = ts::uniform_matrix(rng, n, dim);
      const KernelParams k = random_kernel(rng, dim);
      const VectorXd y = sample_prior(rng, x, k, 0.01);
      const double noise = 0.01;
      const MatrixXd q = ts::uniform_matrix(rng, 25, dim);
      const Prediction p = ForwardGpModel(x, y, k, noise).predict(q);
      const ts::DensePosterior oracle = ts::dense_gp(k.signal_variance, k.lengthscales, noise, x, y, q);
      CHECK_MESSAGE(ts::max_abs(p.mean - oracle.mean) < 1e-8, "n=", n);
      CHECK_MESSAGE(ts::max_abs(p.variance - oracle.variance) < 1e-8, "n=", n);
    }
  }
}

TEST_CASE("standardized targets are restored on predict")
{
  std::mt19937_64 rng(5);
  const MatrixXd x = ts::uniform_matrix(rng, 15, 2);
  const VectorXd y = ts::uniform_vector(rng, 15, 3.0, 9.0);
  const KernelParams k = KernelParams::isotropic(2, 0.5);
  const double offset = y.mean();
  const double scale = 2.0;
  const ForwardGpModel model(x, y, k, 0.01, offset, scale);
  const MatrixXd q = ts::uniform_matrix(rng, 5, 2);
  const ts::DensePosterior oracle =
      ts::dense_gp(1.0, k.lengthscales, 0.01, x, ((y.array() - offset) / scale).matrix(), q);
  const Prediction p = model.predict(q);
  CHECK(ts::max_abs(p.mean - (oracle.mean.array() * scale + offset).matrix()) < 1e-8);
  CHECK(ts::max_abs(p.variance - oracle.variance * scale * scale) < 1e-8);
}

TEST_CASE("Cholesky factor reconstructs the covariance")
{
  std::mt19937_64 rng(6);
  const MatrixXd x = ts::uniform_matrix(rng, 30, 4);
  const KernelParams k = random_kernel(rng, 4);
  const ForwardGpModel model(x, ts::uniform_vector(rng, 30), k, 1e-3);
  MatrixXd a = kernel_matrix(k, x);
  a.diagonal().array() += 1e-3;
  const MatrixXd l = model.factor().lower();
  CHECK((l * l.transpose() - a).norm() / a.norm() < 1e-8);
}

TEST_CASE("jitter rescues a singular covariance")
{
  MatrixXd x(3, 1);
  x << 0.5, 0.5, 0.5;
  const KernelParams k = KernelParams::isotropic(1, 1.0);
  const ForwardGpModel model(x, VectorXd::Ones(3), k, 0.0);
  CHECK(model.factor().jitter() > 0.0);
  CHECK(model.factor().jitter() <= 1e-4);

  MatrixXd bad = MatrixXd::Identity(2, 2);
  bad(0, 0) = -1.0;
  CHECK_THROWS_AS(JitteredCholesky{bad}, NumericalError);
}

TEST_CASE("interpolation and far-field limits")
{
  std::mt19937_64 rng(7);
  const MatrixXd x = ts::uniform_matrix(rng, 10, 2);
  const VectorXd y = ts::uniform_vector(rng, 10, -1.0, 1.0);
  const KernelParams k{0.8, VectorXd::Constant(2, 0.3)};
  const ForwardGpModel model(x, y, k, 1e-8);
  const Prediction at_data = model.predict(x);
  CHECK(ts::max_abs(at_data.mean - y) < 1e-3);
  const MatrixXd far = MatrixXd::Constant(1, 2, 10.0);
  CHECK(std::abs(model.predict(far).variance[0] - 0.8) < 1e-3);
}

TEST_CASE("posterior variance never exceeds the prior and shrinks with data")
{
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 3;
    const MatrixXd x = ts::uniform_matrix(rng, 12, dim);
    const VectorXd y = ts::uniform_vector(rng, 12);
    const KernelParams k = random_kernel(rng, dim);
    const MatrixXd q = ts::uniform_matrix(rng, 30, dim);
    const Prediction small = ForwardGpModel(x.topRows(11), y.head(11), k, 0.01).predict(q);
    const Prediction big = ForwardGpModel(x, y, k, 0.01).predict(q);
    CHECK(small.variance.maxCoeff() <= k.signal_variance + 1e-9);
    CHECK(big.variance.minCoeff() >= 0.0);
    CHECK(((big.variance - small.variance).array() <= 1e-12).all());
  }
}

TEST_CASE("fit recovers the generating lengthscale")
{
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(100 + seed);
    const MatrixXd x = ts::uniform_matrix(rng, 60, 1);
    const KernelParams truth{1.0, VectorXd::Constant(1, 0.3)};
    const VectorXd y = sample_prior(rng, x, truth, 0.01);
    TrainConfig config;
    config.seed = seed;
    config.transform = TargetTransform::None;
    const ForwardGpModel model = ForwardGpModel::fit(x, y, config);
    const double l = model.kernel().lengthscales[0];
    if (l >= 0.15 && l <= 0.6)
      ++hits;
  }
  CHECK(hits >= 16);
}

TEST_CASE("fit is at least as good as its starting point")
{
  std::mt19937_64 rng(9);
  const MatrixXd x = ts::uniform_matrix(rng, 25, 2);
  const VectorXd y = (x.col(0).array() * 6.0).sin().matrix() + 0.1 * ts::uniform_vector(rng, 25);
  TrainConfig config;
  config.restarts = 1;
  config.transform = TargetTransform::None;
  config.warm_kernel = KernelParams::isotropic(2, 0.5);
  config.warm_noise = 0.01;
  const ForwardGpModel model = ForwardGpModel::fit(x, y, config);
  CHECK(model.log_likelihood() >= log_marginal_likelihood(x, y, *config.warm_kernel, 0.01) - 1e-9);
}

TEST_CASE("fit handles constant targets and is reproducible")
{
  std::mt19937_64 rng(10);
  const MatrixXd x = ts::uniform_matrix(rng, 12, 3);
  const ForwardGpModel flat = ForwardGpModel::fit(x, VectorXd::Constant(12, 2.5));
  const Prediction p = flat.predict(ts::uniform_matrix(rng, 20, 3));
  CHECK(ts::max_abs(p.mean.array() - 2.5) < 1e-3);

  const VectorXd y = ts::uniform_vector(rng, 12);
  TrainConfig config;
  config.seed = 77;
  const ForwardGpModel a = ForwardGpModel::fit(x, y, config);
  const ForwardGpModel b = ForwardGpModel::fit(x, y, config);
  CHECK(a.kernel().lengthscales == b.kernel().lengthscales);
  CHECK(a.kernel().signal_variance == b.kernel().signal_variance);
  CHECK(a.noise_variance() == b.noise_variance());

  CHECK_THROWS_AS(ForwardGpModel::fit(x.topRows(1), y.head(1)), DomainError);
}

TEST_CASE("point gradients match finite differences")
{
  std::mt19937_64 rng(11);
  const MatrixXd x = ts::uniform_matrix(rng, 15, 3);
  const VectorXd y = ts::uniform_vector(rng, 15, 2.0, 4.0);
  const ForwardGpModel model(x, y, random_kernel(rng, 3), 0.01, 3.0, 0.5);
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    const VectorXd q = ts::uniform_vector(rng, 3);
    const PointPrediction p = model.predict_with_gradient(q);
    const Prediction batch = model.predict(q.transpose());
    CHECK(p.mean == doctest::Approx(batch.mean[0]).epsilon(1e-12));
    CHECK(p.variance == doctest::Approx(batch.variance[0]).epsilon(1e-10));
    for (int j = 0; j < 3; ++j) {
      VectorXd plus = q;
      VectorXd minus = q;
      plus[j] += h;
      minus[j] -= h;
      const Prediction pp = model.predict(plus.transpose());
      const Prediction pm = model.predict(minus.transpose());
      CHECK(p.d_mean[j] == doctest::Approx((pp.mean[0] - pm.mean[0]) / (2 * h)).epsilon(1e-5));
      CHECK(p.d_variance[j] == doctest::Approx((pp.variance[0] - pm.variance[0]) / (2 * h)).epsilon(1e-4));
    }
  }
}

TEST_CASE("model JSON round trip rebuilds the factorization")
{
  std::mt19937_64 rng(12);
  const MatrixXd x = ts::uniform_matrix(rng, 8, 2);
  const ForwardGpModel model(x, ts::uniform_vector(rng, 8), random_kernel(rng, 2), 0.003, 0.4, 1.7);
  const ForwardGpModel back = nlohmann::json(model).get<ForwardGpModel>();
  const MatrixXd q = ts::uniform_matrix(rng, 6, 2);
  CHECK(ts::max_abs(back.predict(q).mean - model.predict(q).mean) == 0.0);
  CHECK(ts::max_abs(back.predict(q).variance - model.predict(q).variance) == 0.0);
  CHECK_THROWS_AS(matrix_from_json(nlohmann::json::parse("[[1,2],[3]]")), ParseError);
}

TEST_CASE("dimension errors")
{
  const ForwardGpModel model(MatrixXd::Zero(2, 2) + MatrixXd::Identity(2, 2), VectorXd::Ones(2),
                             KernelParams::isotropic(2, 1.0), 0.01);
  CHECK_THROWS_AS(model.predict(MatrixXd::Zero(1, 3)), DimensionError);
  CHECK_THROWS_AS(ForwardGpModel(MatrixXd::Zero(2, 2), VectorXd::Ones(3), KernelParams::isotropic(2, 1.0), 0.1),
                  DimensionError);
}

TEST_CASE("L-BFGS minimizes the Rosenbrock function and respects bounds")
{
  const Objective rosen = [](const VectorXd& x, VectorXd& g) {
    g.resize(2);
    g[0] = -2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]);
    g[1] = 200.0 * (x[1] - x[0] * x[0]);
    return (1.0 - x[0]) * (1.0 - x[0]) + 100.0 * std::pow(x[1] - x[0] * x[0], 2);
  };
  LbfgsOptions options;
  options.max_iterations = 500;
  const LbfgsResult free = minimize_lbfgs(rosen, VectorXd::Constant(2, -1.2), VectorXd::Constant(2, -5.0),
                                          VectorXd::Constant(2, 5.0), options);
  CHECK(free.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(free.x[1] == doctest::Approx(1.0).epsilon(1e-4));

  const LbfgsResult boxed = minimize_lbfgs(rosen, VectorXd::Constant(2, 0.0), VectorXd::Constant(2, -0.5),
                                           VectorXd::Constant(2, 0.5), options);
  CHECK(boxed.x.maxCoeff() <= 0.5);
  CHECK(boxed.x[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(boxed.x[1] == doctest::Approx(0.25).epsilon(1e-4));
  VectorXd g;
  CHECK(boxed.value <= rosen(VectorXd::Zero(2), g));
}
