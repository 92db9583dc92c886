#pragma once

#include <vector>

#include <Eigen/Core>

namespace invtransfer {

/// Number of points in the Das-Dennis lattice with `divisions` steps on m axes.
long lattice_size(int m, int divisions);

/// Das-Dennis simplex lattice, one point per row, unit vectors first.
Eigen::MatrixXd simplex_lattice(int m, int divisions);

/// Smallest lattice holding at least `n` points, greedily thinned to exactly
/// `n` rows by farthest-point selection seeded with the unit vectors.
Eigen::MatrixXd spread_simplex_points(int m, int n);

/// Greedy farthest-point subset of `points` rows. Rows listed in `seeds` are
/// taken first (in order); ties go to the lowest row index.
std::vector<Eigen::Index> farthest_point_subset(const Eigen::MatrixXd& points, Eigen::Index n,
                                                const std::vector<Eigen::Index>& seeds);

/// Euclidean projection of `v` onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

} // namespace invtransfer
