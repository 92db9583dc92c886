#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "invtransfer/gp.hpp"
#include "invtransfer/inverse_gp.hpp"
#include "invtransfer/problems.hpp"

namespace invtransfer {

class InverseDataset;

enum class Variant {
  /// Transfer GPs on overlapping variables, inverse GPs elsewhere.
  InverseTransfer,
  /// Inverse GPs on every variable; the source is never read.
  NoTransfer,
  /// Scalarized UCB over LHS and perturbed-archive candidates, no inverse sampling.
  ParegoUcb,
};

std::string to_string(Variant variant);
Variant variant_from_string(const std::string& name);

struct OptimizerConfig {
  int n_init = 20;
  int budget = 100;
  int n_offspring = 10000;
  double beta = 0.5;
  double eta = 0.05;
  double sigma0 = 0.01;
  int n_prefs = 50;
  Variant variant = Variant::InverseTransfer;
  TrainingMode training_mode = TrainingMode::TwoStep;
  std::uint64_t seed = 0;

  /// Forward GP starts per iteration: the previous optimum plus random ones.
  int forward_restarts = 2;
  int inverse_restarts = 3;
  /// Size of the LHS probe recording the forward model's maximum UCB; 0 disables it.
  int ucb_probe_size = 10000;
  /// Best probe points refined by local ascent.
  int ucb_probe_polish = 5;
  /// Use the thinned lattice instead of the Riesz-energy set.
  bool lattice_preferences = false;

  /// Throws ConfigError.
  void validate() const;
};

void to_json(nlohmann::json& j, const OptimizerConfig& config);
void from_json(const nlohmann::json& j, OptimizerConfig& config);

/// Pairs of (source index, target index), both 0-based.
struct OverlapMap {
  std::vector<std::pair<int, int>> pairs;

  int q() const { return static_cast<int>(pairs.size()); }
  /// The first q variables of both tasks, paired in order.
  static OverlapMap leading(int q);
  /// Throws ConfigError unless q >= 1, indices are unique and within range.
  void validate(int d_source, int d_target) const;
  std::optional<int> source_for(int target_index) const;
};

void to_json(nlohmann::json& j, const OverlapMap& overlap);
void from_json(const nlohmann::json& j, OverlapMap& overlap);

struct ArchiveEntry {
  VectorXd x;
  VectorXd f;
  /// -1 for initial samples, otherwise the 0-based optimization iteration.
  int iteration = -1;
};

/// Append-only evaluation record. Never holds two x closer than 1e-12.
class Archive {
public:
  static constexpr double kDuplicateTolerance = 1e-12;

  Archive() = default;
  Archive(int d, int m) : d_(d), m_(m) {}

  /// Throws ValidationError for a duplicate x or wrong dimensions.
  void add(VectorXd x, VectorXd f, int iteration);
  bool contains(const VectorXd& x) const;

  Eigen::Index size() const { return static_cast<Eigen::Index>(entries_.size()); }
  int d() const { return d_; }
  int m() const { return m_; }
  const std::vector<ArchiveEntry>& entries() const { return entries_; }
  MatrixXd x_matrix(Eigen::Index count = -1) const;
  MatrixXd f_matrix(Eigen::Index count = -1) const;

private:
  int d_ = 0;
  int m_ = 0;
  std::vector<ArchiveEntry> entries_;
};

/// Row indices of `f` not dominated by any other row, in row order.
std::vector<int> nondominated_filter(const MatrixXd& f);

/// Latin hypercube sample inside the box, one point per row.
MatrixXd latin_hypercube(int n, const VectorXd& lower, const VectorXd& upper, std::mt19937_64& rng);

/// n draws from the factorized Gaussian at preference `w`, clamped to the box.
MatrixXd sample_offspring(const std::vector<VariableModel>& models, const VectorXd& w, int n, const VectorXd& lower,
                          const VectorXd& upper, std::mt19937_64& rng);

/// -mean + beta * std for every candidate row.
VectorXd ucb_scores(const ForwardGpModel& forward, const MatrixXd& candidates, double beta);

/// Largest UCB score found by an LHS probe of `probe_size` points whose best
/// `polish` members are refined by bounded local ascent.
double probe_max_ucb(const ForwardGpModel& forward, const VectorXd& lower, const VectorXd& upper, double beta,
                     int probe_size, int polish, std::mt19937_64& rng);

struct UcbChoice {
  Eigen::Index index = 0;
  double score = 0.0;
};

/// First maximizer of the UCB score. Throws DomainError on an empty candidate set.
UcbChoice ucb_select(const ForwardGpModel& forward, const MatrixXd& candidates, double beta);

/// Inverse models for every target variable. With `source` and `overlap`,
/// overlapping variables get transfer GPs; otherwise every variable gets a
/// plain inverse GP.
std::vector<VariableModel> fit_solution_models(const MatrixXd& w_target, const MatrixXd& x_target,
                                               const InverseDataset* source, const OverlapMap* overlap,
                                               const InverseTrainConfig& config);

struct TraceRecord {
  int iteration = 0;
  /// Evaluations spent after this iteration.
  int evaluations = 0;
  VectorXd w;
  VectorXd x;
  VectorXd f;
  int candidate_index = 0;
  double ucb_selected = 0.0;
  double ucb_max_candidates = 0.0;
  std::optional<double> ucb_max_probe;
  /// (target index, fitted lambda) for each transfer model.
  std::vector<std::pair<int, double>> lambdas;
  int n_nondominated = 0;
  /// Offspring came from the LHS fallback instead of the inverse models.
  bool fallback = false;
  double forward_noise_variance = 0.0;
};

void to_json(nlohmann::json& j, const TraceRecord& record);
void from_json(const nlohmann::json& j, TraceRecord& record);

struct RunResult {
  OptimizerConfig config;
  Archive archive;
  /// Archive indices of the dominance-filtered archive.
  std::vector<int> nondominated;
  /// Final per-variable inverse models fitted on the final archive; empty when
  /// fewer than two nondominated points exist or no iteration ran.
  std::vector<VariableModel> inverse_models;
  std::vector<TraceRecord> trace;
  ObjectiveNormalizer normalizer;
  MatrixXd preference_set;
  /// Set when a problem evaluation threw; the archive and trace stay partial.
  std::optional<std::string> failure;
};

using IterationObserver = std::function<void(const TraceRecord&)>;

/// Runs the optimizer until `config.budget` evaluations are spent.
/// Throws ConfigError when the variant needs a source that is missing or
/// incompatible.
RunResult run(const Problem& problem, const InverseDataset* source, const std::optional<OverlapMap>& overlap,
              const OptimizerConfig& config, const IterationObserver& observer = {});

/// Deterministic 64-bit seed mixing.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

} // namespace invtransfer
