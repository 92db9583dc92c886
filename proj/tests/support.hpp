#pragma once

// Hand-rolled generators and dense linear-algebra oracles shared by the unit
// tests. The oracles use explicit inverses and never touch library code paths.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace testing_support {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd uniform_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double lo = 0.0,
                               double hi = 1.0)
{
  std::uniform_real_distribution<double> u(lo, hi);
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = u(rng);
  return m;
}

inline VectorXd uniform_vector(std::mt19937_64& rng, Eigen::Index n, double lo = 0.0, double hi = 1.0)
{
  return uniform_matrix(rng, n, 1, lo, hi).col(0);
}

/// Uniform on the simplex via normalized exponentials.
inline VectorXd simplex_point(std::mt19937_64& rng, int m)
{
  std::exponential_distribution<double> e(1.0);
  VectorXd w(m);
  for (int i = 0; i < m; ++i)
    w[i] = e(rng);
  return w / w.sum();
}

inline MatrixXd simplex_points(std::mt19937_64& rng, int n, int m)
{
  MatrixXd w(n, m);
  for (int i = 0; i < n; ++i)
    w.row(i) = simplex_point(rng, m).transpose();
  return w;
}

/// Points on a rescaled positive sphere patch: mutually nondominated by
/// construction, components strictly inside (0, 1].
inline std::vector<VectorXd> nondominated_set(std::mt19937_64& rng, int m, int n)
{
  std::vector<VectorXd> out;
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::uniform_real_distribution<double> power(0.5, 3.0);
  const double p = power(rng);
  while (static_cast<int>(out.size()) < n) {
    VectorXd v(m);
    for (int i = 0; i < m; ++i)
      v[i] = u(rng);
    // project onto the surface sum v_i^p = 1, which is a Pareto front
    const double norm = std::pow(v.array().pow(p).sum(), 1.0 / p);
    v /= norm;
    if (v.minCoeff() <= 1e-6)
      continue;
    out.push_back(v);
  }
  return out;
}

inline double se_kernel(double sv, const VectorXd& ls, const VectorXd& a, const VectorXd& b)
{
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double t = (a[j] - b[j]) / ls[j];
    s += t * t;
  }
  return sv * std::exp(-0.5 * s);
}

inline MatrixXd se_gram(double sv, const VectorXd& ls, const MatrixXd& a, const MatrixXd& b)
{
  MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k(i, j) = se_kernel(sv, ls, a.row(i).transpose(), b.row(j).transpose());
  return k;
}

struct DensePosterior {
  VectorXd mean;
  VectorXd variance;
};

/// mean = k*^T A^-1 y, var = k** - k*^T A^-1 k* with an explicit inverse.
inline DensePosterior dense_gp(double sv, const VectorXd& ls, double noise, const MatrixXd& x, const VectorXd& y,
                               const MatrixXd& q)
{
  const MatrixXd a = se_gram(sv, ls, x, x) + noise * MatrixXd::Identity(x.rows(), x.rows());
  const MatrixXd a_inv = a.inverse();
  const MatrixXd ks = se_gram(sv, ls, x, q);
  DensePosterior p;
  p.mean = ks.transpose() * a_inv * y;
  p.variance.resize(q.rows());
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    p.variance[i] = sv - ks.col(i).dot(a_inv * ks.col(i));
  return p;
}

/// Transfer-kernel posterior for a target query, offsets applied around `offset`.
inline DensePosterior dense_transfer(double sv, const VectorXd& ls, double lambda, double noise_s, double noise_t,
                                     const MatrixXd& ws, const VectorXd& xs, const MatrixXd& wt,
                                     const VectorXd& xt, double offset, const MatrixXd& q)
{
  const Eigen::Index ns = ws.rows();
  const Eigen::Index nt = wt.rows();
  MatrixXd k(ns + nt, ns + nt);
  k.topLeftCorner(ns, ns) = se_gram(sv, ls, ws, ws);
  k.topRightCorner(ns, nt) = lambda * se_gram(sv, ls, ws, wt);
  k.bottomLeftCorner(nt, ns) = lambda * se_gram(sv, ls, wt, ws);
  k.bottomRightCorner(nt, nt) = se_gram(sv, ls, wt, wt);
  for (Eigen::Index i = 0; i < ns; ++i)
    k(i, i) += noise_s;
  for (Eigen::Index i = 0; i < nt; ++i)
    k(ns + i, ns + i) += noise_t;
  const MatrixXd k_inv = k.inverse();
  VectorXd y(ns + nt);
  y << xs.array() - offset, xt.array() - offset;
  DensePosterior p;
  p.mean.resize(q.rows());
  p.variance.resize(q.rows());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    VectorXd kq(ns + nt);
    kq << lambda * se_gram(sv, ls, ws, q.row(i)).col(0), se_gram(sv, ls, wt, q.row(i)).col(0);
    p.mean[i] = offset + kq.dot(k_inv * y);
    p.variance[i] = sv - kq.dot(k_inv * kq);
  }
  return p;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name)
{
  const std::filesystem::path p = std::filesystem::temp_directory_path() / ("invtransfer-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline double max_abs(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

} // namespace testing_support
