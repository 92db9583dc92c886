#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "invtransfer/dataset.hpp"

namespace invtransfer {

class Problem;

struct Nsga2Options {
  int pop_size = 100;
  int generations = 500;
  double crossover_probability = 0.9;
  double crossover_eta = 20.0;
  double mutation_eta = 20.0;
  /// Per-variable mutation probability; non-positive selects 1/d.
  double mutation_probability = 0.0;
  std::uint64_t seed = 0;
};

struct Population {
  MatrixXd x;
  MatrixXd f;
};

/// Fronts of row indices; front 0 is the nondominated set. Order within a
/// front follows row order.
std::vector<std::vector<int>> nondominated_sort(const MatrixXd& f);

/// Crowding distance of each member of `front`; boundary points get +inf.
std::vector<double> crowding_distance(const MatrixXd& f, const std::vector<int>& front);

/// Elitist nondominated-sort/crowding EA with SBX crossover and polynomial
/// mutation. Returns the final parent population.
Population run_nsga2(const Problem& problem, const Nsga2Options& options);

/// Runs the EA, keeps `keep` nondominated solutions (crowding-truncated),
/// normalizes their objectives over the kept set and converts each to its
/// preference vector. Throws ConfigError when pop_size < keep.
InverseDataset generate_source_dataset(const Problem& problem, int pop_size, int generations, int keep,
                                       std::uint64_t seed);

} // namespace invtransfer
