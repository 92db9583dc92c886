#include "invtransfer/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "invtransfer/decomposition.hpp"
#include "invtransfer/errors.hpp"
#include "invtransfer/problems.hpp"

namespace invtransfer {

std::vector<std::vector<int>> nondominated_sort(const MatrixXd& f)
{
  const int n = static_cast<int>(f.rows());
  std::vector<std::vector<int>> dominated_by(n);
  std::vector<int> count(n, 0);
  std::vector<std::vector<int>> fronts(1);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const VectorXd fi = f.row(i).transpose();
      const VectorXd fj = f.row(j).transpose();
      if (dominates(fi, fj)) {
        dominated_by[i].push_back(j);
        ++count[j];
      } else if (dominates(fj, fi)) {
        dominated_by[j].push_back(i);
        ++count[i];
      }
    }
  }
  for (int i = 0; i < n; ++i)
    if (count[i] == 0)
      fronts[0].push_back(i);
  while (!fronts.back().empty()) {
    std::vector<int> next;
    for (int i : fronts.back())
      for (int j : dominated_by[i])
        if (--count[j] == 0)
          next.push_back(j);
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

std::vector<double> crowding_distance(const MatrixXd& f, const std::vector<int>& front)
{
  const std::size_t n = front.size();
  std::vector<double> distance(n, 0.0);
  if (n <= 2) {
    std::fill(distance.begin(), distance.end(), std::numeric_limits<double>::infinity());
    return distance;
  }
  std::vector<std::size_t> order(n);
  for (Eigen::Index k = 0; k < f.cols(); ++k) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return f(front[a], k) < f(front[b], k); });
    const double lo = f(front[order.front()], k);
    const double hi = f(front[order.back()], k);
    distance[order.front()] = distance[order.back()] = std::numeric_limits<double>::infinity();
    if (!(hi > lo))
      continue;
    for (std::size_t r = 1; r + 1 < n; ++r)
      distance[order[r]] += (f(front[order[r + 1]], k) - f(front[order[r - 1]], k)) / (hi - lo);
  }
  return distance;
}

namespace {

struct Ranked {
  std::vector<int> rank;
  std::vector<double> crowding;
};

Ranked rank_population(const MatrixXd& f)
{
  Ranked r{std::vector<int>(f.rows()), std::vector<double>(f.rows())};
  const auto fronts = nondominated_sort(f);
  for (std::size_t level = 0; level < fronts.size(); ++level) {
    const auto cd = crowding_distance(f, fronts[level]);
    for (std::size_t i = 0; i < fronts[level].size(); ++i) {
      r.rank[fronts[level][i]] = static_cast<int>(level);
      r.crowding[fronts[level][i]] = cd[i];
    }
  }
  return r;
}

// Indices of the best `n` rows by (front, descending crowding).
std::vector<int> environmental_selection(const MatrixXd& f, int n)
{
  std::vector<int> chosen;
  for (const auto& front : nondominated_sort(f)) {
    if (static_cast<int>(chosen.size() + front.size()) <= n) {
      chosen.insert(chosen.end(), front.begin(), front.end());
      continue;
    }
    const auto cd = crowding_distance(f, front);
    std::vector<std::size_t> order(front.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cd[a] > cd[b]; });
    for (std::size_t i = 0; static_cast<int>(chosen.size()) < n; ++i)
      chosen.push_back(front[order[i]]);
    break;
  }
  return chosen;
}

class Variation {
public:
  Variation(const Problem& problem, const Nsga2Options& options, std::mt19937_64& rng)
      : lower_(problem.lower()), upper_(problem.upper()), options_(options), rng_(rng)
  {
    pm_ = options.mutation_probability > 0.0 ? options.mutation_probability : 1.0 / problem.d();
  }

  void crossover(VectorXd& a, VectorXd& b)
  {
    if (unit_(rng_) > options_.crossover_probability)
      return;
    const double eta = options_.crossover_eta;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
      if (unit_(rng_) > 0.5 || std::abs(a[j] - b[j]) < 1e-14)
        continue;
      const double y1 = std::min(a[j], b[j]);
      const double y2 = std::max(a[j], b[j]);
      const double lo = lower_[j];
      const double hi = upper_[j];
      const double u = unit_(rng_);
      auto spread = [&](double beta) {
        const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
        return u <= 1.0 / alpha ? std::pow(u * alpha, 1.0 / (eta + 1.0))
                                : std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
      };
      const double bq1 = spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
      const double bq2 = spread(1.0 + 2.0 * (hi - y2) / (y2 - y1));
      double c1 = std::clamp(0.5 * ((y1 + y2) - bq1 * (y2 - y1)), lo, hi);
      double c2 = std::clamp(0.5 * ((y1 + y2) + bq2 * (y2 - y1)), lo, hi);
      if (unit_(rng_) < 0.5)
        std::swap(c1, c2);
      a[j] = c1;
      b[j] = c2;
    }
  }

  void mutate(VectorXd& x)
  {
    const double eta = options_.mutation_eta;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      if (unit_(rng_) > pm_)
        continue;
      const double lo = lower_[j];
      const double hi = upper_[j];
      const double d1 = (x[j] - lo) / (hi - lo);
      const double d2 = (hi - x[j]) / (hi - lo);
      const double u = unit_(rng_);
      const double power = 1.0 / (eta + 1.0);
      double dq;
      if (u < 0.5) {
        const double v = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
        dq = std::pow(v, power) - 1.0;
      } else {
        const double v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0);
        dq = 1.0 - std::pow(v, power);
      }
      x[j] = std::clamp(x[j] + dq * (hi - lo), lo, hi);
    }
  }

private:
  VectorXd lower_;
  VectorXd upper_;
  Nsga2Options options_;
  std::mt19937_64& rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  double pm_ = 0.0;
};

MatrixXd evaluate_rows(const Problem& problem, const MatrixXd& x)
{
  MatrixXd f(x.rows(), problem.m());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    f.row(i) = problem.evaluate(x.row(i).transpose()).transpose();
  return f;
}

} // namespace

Population run_nsga2(const Problem& problem, const Nsga2Options& options)
{
  if (options.pop_size < 4 || options.pop_size % 2 != 0)
    throw ConfigError("nsga2: population size must be an even number >= 4");
  const int n = options.pop_size;
  const int d = problem.d();
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, n - 1);

  Population pop{MatrixXd(n, d), MatrixXd()};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      pop.x(i, j) = problem.lower()[j] + unit(rng) * (problem.upper()[j] - problem.lower()[j]);
  pop.f = evaluate_rows(problem, pop.x);

  Variation variation(problem, options, rng);
  for (int gen = 0; gen < options.generations; ++gen) {
    const Ranked ranked = rank_population(pop.f);
    auto tournament = [&]() {
      const int a = pick(rng);
      const int b = pick(rng);
      if (ranked.rank[a] != ranked.rank[b])
        return ranked.rank[a] < ranked.rank[b] ? a : b;
      return ranked.crowding[a] >= ranked.crowding[b] ? a : b;
    };
    MatrixXd children(n, d);
    for (int i = 0; i < n; i += 2) {
      VectorXd a = pop.x.row(tournament()).transpose();
      VectorXd b = pop.x.row(tournament()).transpose();
      variation.crossover(a, b);
      variation.mutate(a);
      variation.mutate(b);
      children.row(i) = a.transpose();
      children.row(i + 1) = b.transpose();
    }
    MatrixXd merged_x(2 * n, d);
    merged_x << pop.x, children;
    MatrixXd merged_f(2 * n, problem.m());
    merged_f << pop.f, evaluate_rows(problem, children);
    const std::vector<int> keep = environmental_selection(merged_f, n);
    Population next{MatrixXd(n, d), MatrixXd(n, problem.m())};
    for (int i = 0; i < n; ++i) {
      next.x.row(i) = merged_x.row(keep[i]);
      next.f.row(i) = merged_f.row(keep[i]);
    }
    pop = std::move(next);
  }
  return pop;
}

InverseDataset generate_source_dataset(const Problem& problem, int pop_size, int generations, int keep,
                                       std::uint64_t seed)
{
  if (keep < 1 || pop_size < keep)
    throw ConfigError("generate_source_dataset: need 1 <= keep <= pop_size");
  Nsga2Options options;
  options.pop_size = pop_size + (pop_size % 2);
  options.generations = generations;
  options.seed = seed;
  const Population pop = run_nsga2(problem, options);

  // distinct rows of the first front, crowding-truncated to `keep`
  std::vector<int> front;
  const std::vector<std::vector<int>> fronts = nondominated_sort(pop.f);
  for (int i : fronts.front()) {
    bool duplicate = false;
    for (int j : front)
      duplicate = duplicate || (pop.x.row(i) - pop.x.row(j)).cwiseAbs().maxCoeff() <= 1e-12;
    if (!duplicate)
      front.push_back(i);
  }
  bool nondominated = true;
  std::vector<int> chosen;
  if (static_cast<int>(front.size()) >= keep) {
    MatrixXd ff(front.size(), problem.m());
    for (std::size_t i = 0; i < front.size(); ++i)
      ff.row(i) = pop.f.row(front[i]);
    for (int i : environmental_selection(ff, keep))
      chosen.push_back(front[i]);
    std::sort(chosen.begin(), chosen.end());
  } else {
    nondominated = false;
    chosen = environmental_selection(pop.f, keep);
  }

  MatrixXd x(chosen.size(), problem.d());
  MatrixXd f(chosen.size(), problem.m());
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    x.row(i) = pop.x.row(chosen[i]);
    f.row(i) = pop.f.row(chosen[i]);
  }
  ObjectiveNormalizer normalizer(problem.m());
  normalizer.update_all(f);
  MatrixXd w(chosen.size(), problem.m());
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    w.row(i) = preference_from_objectives(normalizer.normalize(f.row(i).transpose())).transpose();
  return InverseDataset(std::move(w), std::move(x), problem.lower(), problem.upper(),
                        DatasetProvenance{problem.id(), "nsga2", seed}, nondominated);
}

} // namespace invtransfer
