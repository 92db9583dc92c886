#pragma once

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

namespace invtransfer {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Family { Dtlz1, Dtlz2, Dtlz3, Dtlz4 };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// Parameters of one member of the modified DTLZ family.
///
/// `delta1` warps the position variables (it changes which x_I maps to a
/// given front point without changing the front) and `delta2` shifts the
/// optimal value of the distance variables to 0.5 + delta2.
struct MdtlzSpec {
  Family family = Family::Dtlz2;
  bool inverted = false;
  double delta1 = 1.0;
  double delta2 = 0.0;
  int d = 8;
  int m = 3;

  /// Throws ConfigError when any invariant is violated.
  void validate() const;
  /// Stable identifier, e.g. "mDTLZ2-(1,0)-d8-m3" or "mDTLZ2inv-(0.9,0.05)-d6-m3".
  std::string id() const;
  /// Optimal value shared by every distance variable.
  double optimal_distance_value() const { return 0.5 + delta2; }

  friend bool operator==(const MdtlzSpec&, const MdtlzSpec&) = default;
};

void to_json(nlohmann::json& j, const MdtlzSpec& spec);
void from_json(const nlohmann::json& j, MdtlzSpec& spec);

/// Box-bounded deterministic vector objective.
class Problem {
public:
  using Evaluator = std::function<VectorXd(const VectorXd&)>;

  Problem(std::string id, VectorXd lower, VectorXd upper, int m, Evaluator evaluator);

  const std::string& id() const { return id_; }
  int d() const { return static_cast<int>(lower_.size()); }
  int m() const { return m_; }
  const VectorXd& lower() const { return lower_; }
  const VectorXd& upper() const { return upper_; }

  /// Evaluates f(x). Throws BoundsError naming the first offending index.
  VectorXd evaluate(const VectorXd& x) const;
  bool in_bounds(const VectorXd& x) const;
  VectorXd clamp(const VectorXd& x) const;

  /// Set for built-in benchmarks; empty for externally supplied problems.
  const std::optional<MdtlzSpec>& benchmark() const { return benchmark_; }
  void set_benchmark(const MdtlzSpec& spec) { benchmark_ = spec; }

private:
  std::string id_;
  VectorXd lower_;
  VectorXd upper_;
  int m_;
  Evaluator evaluator_;
  std::optional<MdtlzSpec> benchmark_;
};

/// Raw mDTLZ objective; x must already be inside [0,1]^d.
VectorXd evaluate_mdtlz(const MdtlzSpec& spec, const VectorXd& x);

/// The g(x) distance term of the family.
double mdtlz_distance(const MdtlzSpec& spec, const VectorXd& x);

Problem make_mdtlz(const MdtlzSpec& spec);

/// Rows of `x` are Pareto-optimal decision vectors, rows of `f` their images.
struct ReferenceFront {
  MatrixXd x;
  MatrixXd f;
  Eigen::Index size() const { return f.rows(); }
};

/// `n` analytically Pareto-optimal points. A simplex lattice is mapped onto
/// the front and pulled back through the family's parameterization. The m
/// extreme points come first whenever n >= m.
ReferenceFront reference_front(const MdtlzSpec& spec, int n);

/// Maps position parameters t in [0,1]^(m-1) (t_k = x_k^delta1) to the front
/// point they generate at g = 0, non-inverted sign.
VectorXd front_shape(Family family, const VectorXd& t, int m);

/// Running ideal/nadir normalization into (epsilon, 1].
class ObjectiveNormalizer {
public:
  explicit ObjectiveNormalizer(int m = 0, double epsilon = 1e-6);
  ObjectiveNormalizer(VectorXd ideal, VectorXd nadir, double epsilon = 1e-6);

  void update(const VectorXd& f);
  void update_all(const MatrixXd& rows);

  /// clamp((f - ideal) / (nadir - ideal), epsilon, 1) per component. Axes
  /// with nadir == ideal map to 1 and raise the degenerate flag.
  VectorXd normalize(const VectorXd& f) const;

  int m() const { return static_cast<int>(ideal_.size()); }
  long count() const { return count_; }
  double epsilon() const { return epsilon_; }
  const VectorXd& ideal() const { return ideal_; }
  const VectorXd& nadir() const { return nadir_; }
  bool degenerate() const { return degenerate_; }

private:
  VectorXd ideal_;
  VectorXd nadir_;
  double epsilon_;
  long count_ = 0;
  bool degenerate_ = false;
};

void to_json(nlohmann::json& j, const ObjectiveNormalizer& normalizer);
void from_json(const nlohmann::json& j, ObjectiveNormalizer& normalizer);

/// Pareto dominance for minimization: a <= b everywhere, a < b somewhere.
bool dominates(const VectorXd& a, const VectorXd& b);

} // namespace invtransfer
