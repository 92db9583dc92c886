#include "invtransfer/problems.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "invtransfer/errors.hpp"
#include "invtransfer/simplex.hpp"

namespace invtransfer {

BoundsError::BoundsError(std::size_t index, double value, double lower, double upper)
    : Error("bounds violation at index " + std::to_string(index) + ": value " + std::to_string(value) +
            " outside [" + std::to_string(lower) + ", " + std::to_string(upper) + "]"),
      index_(index)
{
}

std::string to_string(Family family)
{
  switch (family) {
  case Family::Dtlz1: return "DTLZ1";
  case Family::Dtlz2: return "DTLZ2";
  case Family::Dtlz3: return "DTLZ3";
  case Family::Dtlz4: return "DTLZ4";
  }
  return "?";
}

Family family_from_string(const std::string& name)
{
  if (name == "DTLZ1") return Family::Dtlz1;
  if (name == "DTLZ2") return Family::Dtlz2;
  if (name == "DTLZ3") return Family::Dtlz3;
  if (name == "DTLZ4") return Family::Dtlz4;
  throw ConfigError("unknown benchmark family '" + name + "'");
}

void MdtlzSpec::validate() const
{
  if (m < 2)
    throw ConfigError("mDTLZ: m must be at least 2");
  if (d - m + 1 < 1)
    throw ConfigError("mDTLZ: need d >= m so that at least one distance variable exists");
  if (!(delta1 > 0.0 && delta1 <= 1.0))
    throw ConfigError("mDTLZ: delta1 must lie in (0, 1]");
  if (!(delta2 >= 0.0 && delta2 < 0.5))
    throw ConfigError("mDTLZ: delta2 must lie in [0, 0.5)");
}

namespace {

std::string short_number(double v)
{
  std::ostringstream os;
  os << v;
  return os.str();
}

} // namespace

std::string MdtlzSpec::id() const
{
  std::string name = "m" + to_string(family) + (inverted ? "inv" : "");
  return name + "-(" + short_number(delta1) + "," + short_number(delta2) + ")-d" + std::to_string(d) +
         "-m" + std::to_string(m);
}

void to_json(nlohmann::json& j, const MdtlzSpec& spec)
{
  j = nlohmann::json{{"family", to_string(spec.family)},
                     {"inverted", spec.inverted},
                     {"delta1", spec.delta1},
                     {"delta2", spec.delta2},
                     {"d", spec.d},
                     {"m", spec.m}};
}

void from_json(const nlohmann::json& j, MdtlzSpec& spec)
{
  try {
    spec.family = family_from_string(j.at("family").get<std::string>());
    spec.inverted = j.value("inverted", false);
    spec.delta1 = j.value("delta1", 1.0);
    spec.delta2 = j.value("delta2", 0.0);
    spec.d = j.at("d").get<int>();
    spec.m = j.at("m").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed problem spec: ") + e.what());
  }
  spec.validate();
}

// ---------------------------------------------------------------------------

Problem::Problem(std::string id, VectorXd lower, VectorXd upper, int m, Evaluator evaluator)
    : id_(std::move(id)), lower_(std::move(lower)), upper_(std::move(upper)), m_(m),
      evaluator_(std::move(evaluator))
{
  if (lower_.size() != upper_.size() || lower_.size() == 0)
    throw ConfigError("problem bounds must be non-empty and of equal length");
  for (Eigen::Index j = 0; j < lower_.size(); ++j)
    if (!(lower_[j] < upper_[j]))
      throw ConfigError("problem bounds: lower[" + std::to_string(j) + "] must be below upper");
  if (m_ < 2)
    throw ConfigError("problem must have at least two objectives");
}

bool Problem::in_bounds(const VectorXd& x) const
{
  if (x.size() != lower_.size())
    return false;
  return ((x.array() >= lower_.array()) && (x.array() <= upper_.array())).all();
}

VectorXd Problem::clamp(const VectorXd& x) const
{
  return x.cwiseMax(lower_).cwiseMin(upper_);
}

VectorXd Problem::evaluate(const VectorXd& x) const
{
  if (x.size() != lower_.size())
    throw DimensionError("problem " + id_ + ": expected " + std::to_string(lower_.size()) +
                         " decision variables, got " + std::to_string(x.size()));
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (!(x[j] >= lower_[j] && x[j] <= upper_[j]))
      throw BoundsError(static_cast<std::size_t>(j), x[j], lower_[j], upper_[j]);
  VectorXd f = evaluator_(x);
  if (f.size() != m_)
    throw DimensionError("problem " + id_ + ": evaluator returned wrong objective count");
  return f;
}

// ---------------------------------------------------------------------------

double mdtlz_distance(const MdtlzSpec& spec, const VectorXd& x)
{
  const double shift = spec.optimal_distance_value();
  const int k = spec.d - spec.m + 1;
  double g = 0.0;
  switch (spec.family) {
  case Family::Dtlz1:
    g = k;
    for (int j = spec.m - 1; j < spec.d; ++j) {
      const double y = x[j] - shift;
      g += y * y - std::cos(2.0 * std::numbers::pi * y);
    }
    break;
  case Family::Dtlz3:
    g = 0.1 * k;
    for (int j = spec.m - 1; j < spec.d; ++j) {
      const double y = x[j] - shift;
      g += y * y - 0.1 * std::cos(2.0 * std::numbers::pi * y);
    }
    break;
  case Family::Dtlz2:
  case Family::Dtlz4:
    for (int j = spec.m - 1; j < spec.d; ++j) {
      const double y = x[j] - shift;
      g += y * y;
    }
    break;
  }
  return g;
}

VectorXd front_shape(Family family, const VectorXd& t, int m)
{
  VectorXd f(m);
  if (family == Family::Dtlz1) {
    for (int i = 0; i < m; ++i) {
      // f_{i+1} = 1/2 * prod_{k < m-1-i} t_k * (1 - t_{m-1-i})   (last factor absent for i = 0)
      double value = 0.5;
      const int upto = m - 1 - i;
      for (int k = 0; k < upto; ++k)
        value *= t[k];
      if (i > 0)
        value *= 1.0 - t[upto];
      f[i] = value;
    }
    return f;
  }
  const double half_pi = 0.5 * std::numbers::pi;
  for (int i = 0; i < m; ++i) {
    double value = 1.0;
    const int upto = m - 1 - i;
    for (int k = 0; k < upto; ++k)
      value *= std::cos(half_pi * t[k]);
    if (i > 0)
      value *= std::sin(half_pi * t[upto]);
    f[i] = value;
  }
  return f;
}

namespace {

double position_exponent(const MdtlzSpec& spec)
{
  return spec.family == Family::Dtlz4 ? 2.0 * spec.delta1 : spec.delta1;
}

} // namespace

VectorXd evaluate_mdtlz(const MdtlzSpec& spec, const VectorXd& x)
{
  const double exponent = position_exponent(spec);
  VectorXd t(spec.m - 1);
  for (int k = 0; k < spec.m - 1; ++k)
    t[k] = std::pow(x[k], exponent);
  const double g = mdtlz_distance(spec, x);
  const VectorXd shape = front_shape(spec.family, t, spec.m);
  if (spec.inverted)
    return -(1.0 - g) * shape;
  return (1.0 + g) * shape;
}

Problem make_mdtlz(const MdtlzSpec& spec)
{
  spec.validate();
  Problem problem(spec.id(), VectorXd::Zero(spec.d), VectorXd::Ones(spec.d), spec.m,
                  [spec](const VectorXd& x) { return evaluate_mdtlz(spec, x); });
  problem.set_benchmark(spec);
  return problem;
}

namespace {

// Recovers t in [0,1]^(m-1) from a non-inverted front point f (g = 0).
VectorXd invert_front_shape(Family family, const VectorXd& f)
{
  const int m = static_cast<int>(f.size());
  VectorXd t(m - 1);
  for (int k = 0; k < m - 1; ++k) {
    // objective m-1-k is the first one carrying the (1 - t_k) / sin factor
    const int head = m - 1 - k;
    if (family == Family::Dtlz1) {
      // prod_{j<=k} t_j = 2 * sum_{i<head} f_i, so t_k is a ratio of partial sums
      const double inner = f.head(head).sum();
      const double outer = inner + f[head];
      t[k] = outer > 0.0 ? inner / outer : 0.0;
    } else {
      const double inner = f.head(head).norm();
      t[k] = std::atan2(f[head], inner) / (0.5 * std::numbers::pi);
    }
    t[k] = std::clamp(t[k], 0.0, 1.0);
  }
  return t;
}

} // namespace

ReferenceFront reference_front(const MdtlzSpec& spec, int n)
{
  spec.validate();
  if (n < 1)
    throw ConfigError("reference_front: n must be at least 1");
  const MatrixXd lattice = spread_simplex_points(spec.m, n);
  const double exponent = position_exponent(spec);

  ReferenceFront front;
  front.x.resize(n, spec.d);
  front.f.resize(n, spec.m);
  for (int r = 0; r < n; ++r) {
    VectorXd p = lattice.row(r).transpose();
    VectorXd target = spec.family == Family::Dtlz1 ? VectorXd(0.5 * p) : VectorXd(p / p.norm());
    const VectorXd t = invert_front_shape(spec.family, target);
    VectorXd x(spec.d);
    for (int k = 0; k < spec.m - 1; ++k)
      x[k] = std::pow(t[k], 1.0 / exponent);
    for (int j = spec.m - 1; j < spec.d; ++j)
      x[j] = spec.optimal_distance_value();
    front.x.row(r) = x.transpose();
    front.f.row(r) = evaluate_mdtlz(spec, x).transpose();
  }
  return front;
}

// ---------------------------------------------------------------------------

ObjectiveNormalizer::ObjectiveNormalizer(int m, double epsilon)
    : ideal_(VectorXd::Constant(m, std::numeric_limits<double>::infinity())),
      nadir_(VectorXd::Constant(m, -std::numeric_limits<double>::infinity())), epsilon_(epsilon)
{
}

ObjectiveNormalizer::ObjectiveNormalizer(VectorXd ideal, VectorXd nadir, double epsilon)
    : ideal_(std::move(ideal)), nadir_(std::move(nadir)), epsilon_(epsilon), count_(2)
{
  if (ideal_.size() != nadir_.size())
    throw DimensionError("normalizer: ideal and nadir lengths differ");
  degenerate_ = ((nadir_ - ideal_).array() <= 0.0).any();
}

void ObjectiveNormalizer::update(const VectorXd& f)
{
  if (ideal_.size() == 0) {
    ideal_ = VectorXd::Constant(f.size(), std::numeric_limits<double>::infinity());
    nadir_ = VectorXd::Constant(f.size(), -std::numeric_limits<double>::infinity());
  }
  if (f.size() != ideal_.size())
    throw DimensionError("normalizer: objective length mismatch");
  ideal_ = ideal_.cwiseMin(f);
  nadir_ = nadir_.cwiseMax(f);
  ++count_;
  degenerate_ = ((nadir_ - ideal_).array() <= 0.0).any();
}

void ObjectiveNormalizer::update_all(const MatrixXd& rows)
{
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    update(rows.row(i).transpose());
}

VectorXd ObjectiveNormalizer::normalize(const VectorXd& f) const
{
  if (f.size() != ideal_.size())
    throw DimensionError("normalizer: objective length mismatch");
  VectorXd out(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double range = nadir_[i] - ideal_[i];
    if (!(range > 0.0) || !std::isfinite(range)) {
      out[i] = 1.0;
      continue;
    }
    out[i] = std::clamp((f[i] - ideal_[i]) / range, epsilon_, 1.0);
  }
  return out;
}

void to_json(nlohmann::json& j, const ObjectiveNormalizer& normalizer)
{
  j = nlohmann::json{{"ideal", std::vector<double>(normalizer.ideal().begin(), normalizer.ideal().end())},
                     {"nadir", std::vector<double>(normalizer.nadir().begin(), normalizer.nadir().end())},
                     {"epsilon", normalizer.epsilon()}};
}

void from_json(const nlohmann::json& j, ObjectiveNormalizer& normalizer)
{
  const auto ideal = j.at("ideal").get<std::vector<double>>();
  const auto nadir = j.at("nadir").get<std::vector<double>>();
  normalizer = ObjectiveNormalizer(Eigen::Map<const VectorXd>(ideal.data(), ideal.size()),
                                   Eigen::Map<const VectorXd>(nadir.data(), nadir.size()),
                                   j.value("epsilon", 1e-6));
}

bool dominates(const VectorXd& a, const VectorXd& b)
{
  bool strictly = false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] > b[i])
      return false;
    if (a[i] < b[i])
      strictly = true;
  }
  return strictly;
}

} // namespace invtransfer
