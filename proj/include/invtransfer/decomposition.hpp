#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace invtransfer {

class Problem;

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct ScalarizationConfig {
  double eta = 0.05;
  void validate() const;
};

/// max_i w_i f_i + eta * sum_i w_i f_i over normalized objectives.
double augmented_tchebycheff(const VectorXd& f_norm, const VectorXd& w, const ScalarizationConfig& config = {});

/// c_i = sum(f) / f_i, w = c / sum(c). Every component must be positive.
VectorXd preference_from_objectives(const VectorXd& f_norm);

struct PreferenceSetOptions {
  /// Riesz exponent; 0 selects m^2.
  double exponent = 0.0;
  int max_iterations = 3000;
  /// Return the thinned Das-Dennis lattice instead of optimizing the energy.
  bool lattice_only = false;
};

/// Riesz s-energy of the rows of `points`: sum over pairs of |p_i - p_j|^-s.
double riesz_energy(const MatrixXd& points, double exponent);

/// `n` well-spread preference vectors (one per row) from projected gradient
/// descent on the Riesz energy, started from a jittered lattice.
/// Deterministic for a fixed seed. Throws ConfigError when n < m or m < 2.
MatrixXd generate_preference_set(int m, int n, std::uint64_t seed, const PreferenceSetOptions& options = {});

/// Smallest pairwise Euclidean distance among the rows.
double min_pairwise_distance(const MatrixXd& points);

/// True iff `pareto_f` minimizes the plain (eta = 0) Tchebycheff function
/// under the preference derived from its own objectives (preference_from_objectives),
/// compared against `candidates`.
/// Objective vectors are taken as already normalized.
bool check_proposition1(const VectorXd& pareto_f, const std::vector<VectorXd>& candidates);

/// Same check with objective vectors obtained by evaluating `problem`.
bool check_proposition1(const Problem& problem, const VectorXd& pareto_x, const std::vector<VectorXd>& candidates);

nlohmann::json preference_set_to_json(const MatrixXd& set, std::uint64_t seed);
MatrixXd preference_set_from_json(const nlohmann::json& j);

} // namespace invtransfer
