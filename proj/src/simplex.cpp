#include "invtransfer/simplex.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "invtransfer/errors.hpp"

namespace invtransfer {

long lattice_size(int m, int divisions)
{
  // C(divisions + m - 1, m - 1)
  long result = 1;
  for (int k = 1; k <= m - 1; ++k)
    result = result * (divisions + k) / k;
  return result;
}

namespace {

void fill_lattice(int m, int divisions, int axis, int remaining, std::vector<int>& current,
                  std::vector<std::vector<int>>& out)
{
  if (axis == m - 1) {
    current[axis] = remaining;
    out.push_back(current);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    current[axis] = v;
    fill_lattice(m, divisions, axis + 1, remaining - v, current, out);
  }
}

} // namespace

Eigen::MatrixXd simplex_lattice(int m, int divisions)
{
  if (m < 1 || divisions < 1)
    throw ConfigError("simplex_lattice: need m >= 1 and divisions >= 1");
  std::vector<std::vector<int>> raw;
  std::vector<int> current(m, 0);
  fill_lattice(m, divisions, 0, divisions, current, raw);

  // unit vectors first (e_1, e_2, ...), remaining points in generation order
  std::stable_partition(raw.begin(), raw.end(), [divisions](const std::vector<int>& p) {
    return std::find(p.begin(), p.end(), divisions) != p.end();
  });

  Eigen::MatrixXd points(raw.size(), m);
  for (std::size_t i = 0; i < raw.size(); ++i)
    for (int j = 0; j < m; ++j)
      points(i, j) = static_cast<double>(raw[i][j]) / divisions;
  return points;
}

std::vector<Eigen::Index> farthest_point_subset(const Eigen::MatrixXd& points, Eigen::Index n,
                                                const std::vector<Eigen::Index>& seeds)
{
  const Eigen::Index total = points.rows();
  n = std::min(n, total);
  std::vector<Eigen::Index> chosen;
  chosen.reserve(n);
  std::vector<char> taken(total, 0);
  Eigen::VectorXd min_dist = Eigen::VectorXd::Constant(total, std::numeric_limits<double>::infinity());

  auto take = [&](Eigen::Index idx) {
    chosen.push_back(idx);
    taken[idx] = 1;
    for (Eigen::Index i = 0; i < total; ++i) {
      if (taken[i])
        continue;
      const double dist = (points.row(i) - points.row(idx)).squaredNorm();
      if (dist < min_dist[i])
        min_dist[i] = dist;
    }
  };

  for (Eigen::Index s : seeds) {
    if (static_cast<Eigen::Index>(chosen.size()) >= n)
      break;
    if (s >= 0 && s < total && !taken[s])
      take(s);
  }
  while (static_cast<Eigen::Index>(chosen.size()) < n) {
    Eigen::Index best = -1;
    double best_dist = -1.0;
    for (Eigen::Index i = 0; i < total; ++i) {
      if (!taken[i] && min_dist[i] > best_dist) {
        best_dist = min_dist[i];
        best = i;
      }
    }
    take(best);
  }
  return chosen;
}

Eigen::MatrixXd spread_simplex_points(int m, int n)
{
  if (n < 1)
    throw ConfigError("spread_simplex_points: n must be positive");
  if (m == 1)
    return Eigen::MatrixXd::Ones(1, 1);
  int divisions = 1;
  while (lattice_size(m, divisions) < n)
    ++divisions;
  Eigen::MatrixXd lattice = simplex_lattice(m, divisions);
  if (lattice.rows() == n)
    return lattice;

  std::vector<Eigen::Index> seeds(m);
  std::iota(seeds.begin(), seeds.end(), 0);
  const auto idx = farthest_point_subset(lattice, n, seeds);
  Eigen::MatrixXd out(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    out.row(i) = lattice.row(idx[i]);
  return out;
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v)
{
  // sort-based projection (Held, Wolfe & Crowder)
  const Eigen::Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += u[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0)
      theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

} // namespace invtransfer
