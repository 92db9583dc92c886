#include "invtransfer/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace invtransfer {

namespace {

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lower, const Eigen::VectorXd& upper)
{
  return x.cwiseMax(lower).cwiseMin(upper);
}

// Gradient with components that push against an active bound zeroed.
Eigen::VectorXd projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                                   const Eigen::VectorXd& lower, const Eigen::VectorXd& upper)
{
  Eigen::VectorXd pg = g;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if ((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0))
      pg[i] = 0.0;
  }
  return pg;
}

} // namespace

LbfgsResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                           const Eigen::VectorXd& upper, const LbfgsOptions& options)
{
  const Eigen::Index n = x0.size();
  LbfgsResult result;
  result.x = project(x0, lower, upper);

  Eigen::VectorXd grad(n);
  result.value = objective(result.x, grad);
  result.evaluations = 1;
  if (!std::isfinite(result.value))
    return result;

  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  std::deque<double> rho_hist;

  Eigen::VectorXd x = result.x;
  double fx = result.value;
  Eigen::VectorXd g = grad;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    const Eigen::VectorXd pg = projected_gradient(x, g, lower, upper);
    if (pg.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      result.converged = true;
      break;
    }

    // two-loop recursion on the free variables
    Eigen::VectorXd q = pg;
    const std::size_t k = s_hist.size();
    std::vector<double> alpha(k);
    for (std::size_t i = k; i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    double gamma = 1.0;
    if (k > 0)
      gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    Eigen::VectorXd direction = gamma * q;
    for (std::size_t i = 0; i < k; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(direction);
      direction += s_hist[i] * (alpha[i] - beta);
    }
    direction = -direction;
    for (Eigen::Index i = 0; i < n; ++i)
      if (pg[i] == 0.0)
        direction[i] = 0.0;

    double slope = direction.dot(g);
    if (!(slope < 0.0)) {
      // not a descent direction: restart from steepest descent
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      direction = -pg;
      slope = direction.dot(g);
      if (!(slope < 0.0)) {
        result.converged = true;
        break;
      }
    }

    double step = 1.0;
    if (k == 0)
      step = std::min(1.0, 1.0 / direction.lpNorm<Eigen::Infinity>());

    bool accepted = false;
    Eigen::VectorXd x_new(n);
    Eigen::VectorXd g_new(n);
    double f_new = 0.0;
    for (int ls = 0; ls < options.max_line_search; ++ls) {
      x_new = project(x + step * direction, lower, upper);
      f_new = objective(x_new, g_new);
      ++result.evaluations;
      const double decrease = g.dot(x_new - x);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * decrease) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted)
      break;

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    const double previous = fx;
    x = x_new;
    fx = f_new;
    g = g_new;

    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    if (std::abs(previous - fx) <= options.relative_tolerance * std::max({1.0, std::abs(previous), std::abs(fx)})) {
      result.converged = true;
      break;
    }
  }

  result.x = x;
  result.value = fx;
  return result;
}

} // namespace invtransfer
