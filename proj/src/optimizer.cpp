#include "invtransfer/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "invtransfer/dataset.hpp"
#include "invtransfer/decomposition.hpp"
#include "invtransfer/errors.hpp"
#include "invtransfer/lbfgs.hpp"

namespace invtransfer {

std::string to_string(Variant variant)
{
  switch (variant) {
  case Variant::InverseTransfer:
    return "inverse-transfer";
  case Variant::NoTransfer:
    return "no-transfer";
  case Variant::ParegoUcb:
    return "parego-ucb";
  }
  return "unknown";
}

Variant variant_from_string(const std::string& name)
{
  if (name == "inverse-transfer")
    return Variant::InverseTransfer;
  if (name == "no-transfer")
    return Variant::NoTransfer;
  if (name == "parego-ucb")
    return Variant::ParegoUcb;
  throw ConfigError("unknown variant '" + name + "' (expected inverse-transfer, no-transfer or parego-ucb)");
}

void OptimizerConfig::validate() const
{
  if (n_init < 1)
    throw ConfigError("n_init must be positive");
  if (budget < n_init)
    throw ConfigError("budget must be at least n_init");
  if (n_offspring < 1 || n_prefs < 1)
    throw ConfigError("n_offspring and n_prefs must be positive");
  if (!(beta >= 0.0) || !(eta >= 0.0) || !(sigma0 > 0.0))
    throw ConfigError("beta and eta must be non-negative and sigma0 positive");
  if (forward_restarts < 1 || inverse_restarts < 1 || ucb_probe_size < 0)
    throw ConfigError("restart counts must be positive and the probe size non-negative");
}

void to_json(nlohmann::json& j, const OptimizerConfig& c)
{
  j = nlohmann::json{{"n_init", c.n_init},
                     {"budget", c.budget},
                     {"n_offspring", c.n_offspring},
                     {"beta", c.beta},
                     {"eta", c.eta},
                     {"sigma0", c.sigma0},
                     {"n_prefs", c.n_prefs},
                     {"variant", to_string(c.variant)},
                     {"training_mode", to_string(c.training_mode)},
                     {"seed", c.seed},
                     {"forward_restarts", c.forward_restarts},
                     {"inverse_restarts", c.inverse_restarts},
                     {"ucb_probe_size", c.ucb_probe_size},
                     {"ucb_probe_polish", c.ucb_probe_polish},
                     {"lattice_preferences", c.lattice_preferences}};
}

void from_json(const nlohmann::json& j, OptimizerConfig& c)
{
  const OptimizerConfig d;
  c.n_init = j.value("n_init", d.n_init);
  c.budget = j.value("budget", d.budget);
  c.n_offspring = j.value("n_offspring", d.n_offspring);
  c.beta = j.value("beta", d.beta);
  c.eta = j.value("eta", d.eta);
  c.sigma0 = j.value("sigma0", d.sigma0);
  c.n_prefs = j.value("n_prefs", d.n_prefs);
  c.variant = variant_from_string(j.value("variant", to_string(d.variant)));
  c.training_mode = training_mode_from_string(j.value("training_mode", std::string(to_string(d.training_mode))));
  c.seed = j.value("seed", d.seed);
  c.forward_restarts = j.value("forward_restarts", d.forward_restarts);
  c.inverse_restarts = j.value("inverse_restarts", d.inverse_restarts);
  c.ucb_probe_size = j.value("ucb_probe_size", d.ucb_probe_size);
  c.ucb_probe_polish = j.value("ucb_probe_polish", d.ucb_probe_polish);
  c.lattice_preferences = j.value("lattice_preferences", d.lattice_preferences);
}

// ---------------------------------------------------------------------------

OverlapMap OverlapMap::leading(int q)
{
  OverlapMap map;
  for (int i = 0; i < q; ++i)
    map.pairs.emplace_back(i, i);
  return map;
}

void OverlapMap::validate(int d_source, int d_target) const
{
  if (pairs.empty())
    throw ConfigError("overlap map: at least one overlapping variable is required");
  std::set<int> sources;
  std::set<int> targets;
  for (const auto& [s, t] : pairs) {
    if (s < 0 || s >= d_source)
      throw ConfigError("overlap map: source index " + std::to_string(s) + " outside 0.." +
                        std::to_string(d_source - 1));
    if (t < 0 || t >= d_target)
      throw ConfigError("overlap map: target index " + std::to_string(t) + " outside 0.." +
                        std::to_string(d_target - 1));
    if (!sources.insert(s).second || !targets.insert(t).second)
      throw ConfigError("overlap map: indices must be unique on both sides");
  }
}

std::optional<int> OverlapMap::source_for(int target_index) const
{
  for (const auto& [s, t] : pairs)
    if (t == target_index)
      return s;
  return std::nullopt;
}

void to_json(nlohmann::json& j, const OverlapMap& overlap)
{
  j = nlohmann::json::array();
  for (const auto& [s, t] : overlap.pairs)
    j.push_back({{"source", s}, {"target", t}});
}

void from_json(const nlohmann::json& j, OverlapMap& overlap)
{
  overlap.pairs.clear();
  for (const auto& p : j)
    overlap.pairs.emplace_back(p.at("source").get<int>(), p.at("target").get<int>());
}

// ---------------------------------------------------------------------------

void Archive::add(VectorXd x, VectorXd f, int iteration)
{
  if (x.size() != d_ || f.size() != m_)
    throw ValidationError("archive: entry dimensions do not match (d, m)");
  if (contains(x))
    throw ValidationError("archive: duplicate decision vector");
  entries_.push_back(ArchiveEntry{std::move(x), std::move(f), iteration});
}

bool Archive::contains(const VectorXd& x) const
{
  return std::any_of(entries_.begin(), entries_.end(), [&](const ArchiveEntry& e) {
    return (e.x - x).cwiseAbs().maxCoeff() <= kDuplicateTolerance;
  });
}

MatrixXd Archive::x_matrix(Eigen::Index count) const
{
  const Eigen::Index n = count < 0 ? size() : std::min(count, size());
  MatrixXd out(n, d_);
  for (Eigen::Index i = 0; i < n; ++i)
    out.row(i) = entries_[i].x.transpose();
  return out;
}

MatrixXd Archive::f_matrix(Eigen::Index count) const
{
  const Eigen::Index n = count < 0 ? size() : std::min(count, size());
  MatrixXd out(n, m_);
  for (Eigen::Index i = 0; i < n; ++i)
    out.row(i) = entries_[i].f.transpose();
  return out;
}

std::vector<int> nondominated_filter(const MatrixXd& f)
{
  std::vector<int> keep;
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    bool dominated = false;
    for (Eigen::Index j = 0; j < f.rows() && !dominated; ++j)
      dominated = j != i && dominates(f.row(j).transpose(), f.row(i).transpose());
    if (!dominated)
      keep.push_back(static_cast<int>(i));
  }
  return keep;
}

MatrixXd latin_hypercube(int n, const VectorXd& lower, const VectorXd& upper, std::mt19937_64& rng)
{
  const Eigen::Index d = lower.size();
  MatrixXd out(n, d);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> strata(n);
  for (Eigen::Index j = 0; j < d; ++j) {
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    for (int i = 0; i < n; ++i)
      out(i, j) = lower[j] + (upper[j] - lower[j]) * (strata[i] + unit(rng)) / n;
  }
  return out;
}

MatrixXd sample_offspring(const std::vector<VariableModel>& models, const VectorXd& w, int n, const VectorXd& lower,
                          const VectorXd& upper, std::mt19937_64& rng)
{
  const SolutionDistribution dist = predict_solution_distribution(models, w);
  if (dist.mean.size() != lower.size())
    throw DimensionError("sample_offspring: model count does not match the bounds");
  const VectorXd sd = dist.variance.cwiseMax(0.0).cwiseSqrt();
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd out(n, lower.size());
  for (int i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < lower.size(); ++j)
      out(i, j) = std::clamp(dist.mean[j] + sd[j] * normal(rng), lower[j], upper[j]);
  return out;
}

VectorXd ucb_scores(const ForwardGpModel& forward, const MatrixXd& candidates, double beta)
{
  const Prediction p = forward.predict(candidates);
  return -p.mean.array() + beta * p.variance.array().sqrt();
}

double probe_max_ucb(const ForwardGpModel& forward, const VectorXd& lower, const VectorXd& upper, double beta,
                     int probe_size, int polish, std::mt19937_64& rng)
{
  if (probe_size < 1)
    throw DomainError("probe_max_ucb: empty probe");
  const MatrixXd probe = latin_hypercube(probe_size, lower, upper, rng);
  const VectorXd scores = ucb_scores(forward, probe, beta);
  double best = scores.maxCoeff();

  std::vector<Eigen::Index> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  const auto top = std::min<std::size_t>(static_cast<std::size_t>(std::max(polish, 0)), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                    [&](Eigen::Index a, Eigen::Index b) { return scores[a] > scores[b]; });
  const Objective negative_ucb = [&](const VectorXd& x, VectorXd& grad) {
    const PointPrediction p = forward.predict_with_gradient(x);
    const double sd = std::sqrt(p.variance);
    grad = p.d_mean;
    if (sd > 1e-12)
      grad -= beta * p.d_variance / (2.0 * sd);
    return p.mean - beta * sd;
  };
  LbfgsOptions options;
  options.max_iterations = 50;
  for (std::size_t i = 0; i < top; ++i) {
    const LbfgsResult r = minimize_lbfgs(negative_ucb, probe.row(order[i]).transpose(), lower, upper, options);
    best = std::max(best, -r.value);
  }
  return best;
}

UcbChoice ucb_select(const ForwardGpModel& forward, const MatrixXd& candidates, double beta)
{
  if (candidates.rows() == 0)
    throw DomainError("ucb_select: empty candidate set");
  const VectorXd scores = ucb_scores(forward, candidates, beta);
  UcbChoice best{0, scores[0]};
  for (Eigen::Index i = 1; i < scores.size(); ++i)
    if (scores[i] > best.score)
      best = {i, scores[i]};
  return best;
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b)
{
  auto splitmix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return splitmix(splitmix(splitmix(base) ^ a) ^ b);
}

std::vector<VariableModel> fit_solution_models(const MatrixXd& w_target, const MatrixXd& x_target,
                                               const InverseDataset* source, const OverlapMap* overlap,
                                               const InverseTrainConfig& config)
{
  const int d = static_cast<int>(x_target.cols());
  if (source && overlap)
    overlap->validate(source->d(), d);
  std::vector<VariableModel> models;
  models.reserve(d);
  for (int j = 0; j < d; ++j) {
    InverseTrainConfig cfg = config;
    cfg.seed = mix_seed(config.seed, static_cast<std::uint64_t>(j));
    const std::optional<int> s = (source && overlap) ? overlap->source_for(j) : std::nullopt;
    if (s)
      models.emplace_back(InvTgpModel::fit(j, *s, source->w(), source->column(*s), w_target, x_target.col(j), cfg));
    else
      models.emplace_back(InverseGpModel::fit(j, w_target, x_target.col(j), cfg));
  }
  return models;
}

// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const TraceRecord& r)
{
  nlohmann::json lambdas = nlohmann::json::array();
  for (const auto& [t, l] : r.lambdas)
    lambdas.push_back({{"target", t}, {"lambda", l}});
  j = nlohmann::json{{"iteration", r.iteration},
                     {"evaluations", r.evaluations},
                     {"w", vector_to_json(r.w)},
                     {"x", vector_to_json(r.x)},
                     {"f", vector_to_json(r.f)},
                     {"candidate_index", r.candidate_index},
                     {"ucb_selected", r.ucb_selected},
                     {"ucb_max_candidates", r.ucb_max_candidates},
                     {"ucb_max_probe", r.ucb_max_probe ? nlohmann::json(*r.ucb_max_probe) : nlohmann::json()},
                     {"lambdas", std::move(lambdas)},
                     {"n_nondominated", r.n_nondominated},
                     {"fallback", r.fallback},
                     {"forward_noise_variance", r.forward_noise_variance}};
}

void from_json(const nlohmann::json& j, TraceRecord& r)
{
  r.iteration = j.at("iteration").get<int>();
  r.evaluations = j.at("evaluations").get<int>();
  r.w = vector_from_json(j.at("w"));
  r.x = vector_from_json(j.at("x"));
  r.f = vector_from_json(j.at("f"));
  r.candidate_index = j.value("candidate_index", 0);
  r.ucb_selected = j.at("ucb_selected").get<double>();
  r.ucb_max_candidates = j.at("ucb_max_candidates").get<double>();
  r.ucb_max_probe.reset();
  if (j.contains("ucb_max_probe") && !j.at("ucb_max_probe").is_null())
    r.ucb_max_probe = j.at("ucb_max_probe").get<double>();
  r.lambdas.clear();
  for (const auto& l : j.value("lambdas", nlohmann::json::array()))
    r.lambdas.emplace_back(l.at("target").get<int>(), l.at("lambda").get<double>());
  r.n_nondominated = j.value("n_nondominated", 0);
  r.fallback = j.value("fallback", false);
  r.forward_noise_variance = j.value("forward_noise_variance", 0.0);
}

// ---------------------------------------------------------------------------

namespace {

// Preference vectors visited in shuffled epochs, each vector once per epoch.
class PreferenceCycle {
public:
  PreferenceCycle(Eigen::Index n, std::mt19937_64& rng) : order_(n), rng_(rng) {}

  Eigen::Index next()
  {
    if (pos_ == order_.size()) {
      std::iota(order_.begin(), order_.end(), 0);
      std::shuffle(order_.begin(), order_.end(), rng_);
      pos_ = 0;
    }
    return order_[pos_++];
  }

private:
  std::vector<Eigen::Index> order_;
  std::size_t pos_ = order_.size();
  std::mt19937_64& rng_;
};

ObjectiveNormalizer archive_normalizer(const Archive& archive)
{
  ObjectiveNormalizer normalizer(archive.m());
  normalizer.update_all(archive.f_matrix());
  return normalizer;
}

MatrixXd preferences_of(const MatrixXd& f, const std::vector<int>& rows, const ObjectiveNormalizer& normalizer)
{
  MatrixXd w(rows.size(), f.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    w.row(i) = preference_from_objectives(normalizer.normalize(f.row(rows[i]).transpose())).transpose();
  return w;
}

MatrixXd select_rows(const MatrixXd& m, const std::vector<int>& rows)
{
  MatrixXd out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(i) = m.row(rows[i]);
  return out;
}

// Half LHS, half Gaussian perturbations (sd = 0.1 of the range) of nondominated points.
MatrixXd perturbation_candidates(const MatrixXd& x_nd, int n, const VectorXd& lower, const VectorXd& upper,
                                 std::mt19937_64& rng)
{
  const int n_lhs = n - n / 2;
  MatrixXd out(n, lower.size());
  out.topRows(n_lhs) = latin_hypercube(n_lhs, lower, upper, rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<Eigen::Index> pick(0, x_nd.rows() - 1);
  for (int i = n_lhs; i < n; ++i) {
    const Eigen::Index parent = pick(rng);
    for (Eigen::Index j = 0; j < lower.size(); ++j)
      out(i, j) = std::clamp(x_nd(parent, j) + 0.1 * (upper[j] - lower[j]) * normal(rng), lower[j], upper[j]);
  }
  return out;
}

InverseTrainConfig inverse_config(const OptimizerConfig& config, std::uint64_t seed)
{
  InverseTrainConfig cfg;
  cfg.sigma0 = config.sigma0;
  cfg.restarts = config.inverse_restarts;
  cfg.mode = config.training_mode;
  cfg.seed = seed;
  return cfg;
}

} // namespace

RunResult run(const Problem& problem, const InverseDataset* source, const std::optional<OverlapMap>& overlap,
              const OptimizerConfig& config, const IterationObserver& observer)
{
  config.validate();
  const bool transfer = config.variant == Variant::InverseTransfer;
  if (transfer) {
    if (!source || !overlap)
      throw ConfigError("the inverse-transfer variant needs a source dataset and an overlap map");
    overlap->validate(source->d(), problem.d());
    if (source->m() != problem.m())
      throw ConfigError("source dataset has " + std::to_string(source->m()) + " objectives, target has " +
                        std::to_string(problem.m()));
    if (source->size() < 1)
      throw ConfigError("source dataset is empty");
  }
  // the source is only reachable through these two pointers
  const InverseDataset* src = transfer ? source : nullptr;
  const OverlapMap* ovl = transfer ? &*overlap : nullptr;

  RunResult result;
  result.config = config;
  result.archive = Archive(problem.d(), problem.m());
  PreferenceSetOptions pref_options;
  pref_options.lattice_only = config.lattice_preferences;
  result.preference_set = generate_preference_set(problem.m(), std::max(config.n_prefs, problem.m()), 0, pref_options);

  std::mt19937_64 rng(mix_seed(config.seed, 0x1a75));
  const ScalarizationConfig scalarization{config.eta};

  auto evaluate_into = [&](const VectorXd& x, int iteration) -> std::optional<VectorXd> {
    try {
      VectorXd f = problem.evaluate(x);
      result.archive.add(x, f, iteration);
      return f;
    } catch (const std::exception& e) {
      result.failure = e.what();
      return std::nullopt;
    }
  };

  const MatrixXd initial = latin_hypercube(config.n_init, problem.lower(), problem.upper(), rng);
  for (Eigen::Index i = 0; i < initial.rows() && !result.failure; ++i)
    evaluate_into(initial.row(i).transpose(), -1);

  PreferenceCycle cycle(result.preference_set.rows(), rng);
  std::optional<KernelParams> warm_kernel;
  std::optional<double> warm_noise;

  for (int iteration = 0; !result.failure && result.archive.size() < config.budget; ++iteration) {
    TraceRecord record;
    record.iteration = iteration;
    record.w = result.preference_set.row(cycle.next()).transpose();

    const MatrixXd x_all = result.archive.x_matrix();
    const MatrixXd f_all = result.archive.f_matrix();
    const ObjectiveNormalizer normalizer = archive_normalizer(result.archive);
    VectorXd y(f_all.rows());
    for (Eigen::Index i = 0; i < f_all.rows(); ++i)
      y[i] = augmented_tchebycheff(normalizer.normalize(f_all.row(i).transpose()), record.w, scalarization);

    TrainConfig gp_config;
    gp_config.restarts = config.forward_restarts;
    gp_config.seed = mix_seed(config.seed, 0xf0, static_cast<std::uint64_t>(iteration));
    gp_config.warm_kernel = warm_kernel;
    gp_config.warm_noise = warm_noise;
    const ForwardGpModel forward = ForwardGpModel::fit(x_all, y, gp_config);
    warm_kernel = forward.kernel();
    warm_noise = forward.noise_variance();
    record.forward_noise_variance = forward.noise_variance();

    const std::vector<int> nd = nondominated_filter(f_all);
    record.n_nondominated = static_cast<int>(nd.size());
    MatrixXd candidates;
    if (config.variant == Variant::ParegoUcb) {
      candidates = perturbation_candidates(select_rows(x_all, nd), config.n_offspring, problem.lower(),
                                           problem.upper(), rng);
    } else if (nd.size() < 2) {
      record.fallback = true;
      candidates = latin_hypercube(config.n_offspring, problem.lower(), problem.upper(), rng);
    } else {
      const MatrixXd w_target = preferences_of(f_all, nd, normalizer);
      const std::vector<VariableModel> models =
          fit_solution_models(w_target, select_rows(x_all, nd), src, ovl,
                              inverse_config(config, mix_seed(config.seed, 0x1f, static_cast<std::uint64_t>(iteration))));
      for (const VariableModel& model : models)
        if (const auto* tgp = std::get_if<InvTgpModel>(&model))
          record.lambdas.emplace_back(tgp->var_index(), tgp->lambda());
      candidates = sample_offspring(models, record.w, config.n_offspring, problem.lower(), problem.upper(), rng);
    }

    VectorXd scores = ucb_scores(forward, candidates, config.beta);
    record.ucb_max_candidates = scores.maxCoeff();
    for (Eigen::Index i = 0; i < candidates.rows(); ++i)
      if (result.archive.contains(candidates.row(i).transpose()))
        scores[i] = -std::numeric_limits<double>::infinity();
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < scores.size(); ++i)
      if (scores[i] > scores[best])
        best = i;
    if (!std::isfinite(scores[best])) {
      // every candidate repeats an archived point
      candidates = latin_hypercube(1, problem.lower(), problem.upper(), rng);
      scores = ucb_scores(forward, candidates, config.beta);
      best = 0;
      record.fallback = true;
    }
    record.candidate_index = static_cast<int>(best);
    record.ucb_selected = scores[best];
    record.x = candidates.row(best).transpose();

    if (config.ucb_probe_size > 0) {
      std::mt19937_64 probe_rng(mix_seed(config.seed, 0x9b, static_cast<std::uint64_t>(iteration)));
      record.ucb_max_probe = probe_max_ucb(forward, problem.lower(), problem.upper(), config.beta,
                                           config.ucb_probe_size, config.ucb_probe_polish, probe_rng);
    }

    const std::optional<VectorXd> f = evaluate_into(record.x, iteration);
    if (!f)
      break;
    record.f = *f;
    record.evaluations = static_cast<int>(result.archive.size());
    result.trace.push_back(record);
    if (observer)
      observer(result.trace.back());
  }

  const MatrixXd f_all = result.archive.f_matrix();
  result.nondominated = nondominated_filter(f_all);
  result.normalizer = archive_normalizer(result.archive);
  if (!result.trace.empty() && result.nondominated.size() >= 2) {
    const MatrixXd w_target = preferences_of(f_all, result.nondominated, result.normalizer);
    result.inverse_models =
        fit_solution_models(w_target, select_rows(result.archive.x_matrix(), result.nondominated), src, ovl,
                            inverse_config(config, mix_seed(config.seed, 0x1f, 0xffff)));
  }
  return result;
}

} // namespace invtransfer
