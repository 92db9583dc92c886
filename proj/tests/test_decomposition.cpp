#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "invtransfer/decomposition.hpp"
#include "invtransfer/errors.hpp"
#include "invtransfer/problems.hpp"
#include "invtransfer/simplex.hpp"
#include "support.hpp"

using namespace invtransfer;
namespace ts = testing_support;

namespace {

VectorXd vec(std::initializer_list<double> values)
{
  VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values)
    v[i++] = x;
  return v;
}

} // namespace

TEST_CASE("augmented Tchebycheff examples")
{
  CHECK(augmented_tchebycheff(vec({0.3, 0.9}), vec({1.0, 0.0}), {0.0}) == doctest::Approx(0.3));
  CHECK(augmented_tchebycheff(vec({0.4, 0.6}), vec({0.5, 0.5}), {0.05}) == doctest::Approx(0.325));
  CHECK_THROWS_AS(augmented_tchebycheff(vec({0.4, 0.6}), vec({1.0}), {}), DimensionError);
  CHECK_THROWS_AS(ScalarizationConfig{-0.1}.validate(), ConfigError);
}

TEST_CASE("Tchebycheff argmin is invariant to rescaling the preference")
{
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd f = ts::uniform_matrix(rng, 20, 3, 0.01, 1.0);
    const VectorXd w = ts::simplex_point(rng, 3);
    const double c = ts::uniform_vector(rng, 1, 0.1, 10.0)[0];
    auto argmin = [&](const VectorXd& weights) {
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < f.rows(); ++i)
        if (augmented_tchebycheff(f.row(i).transpose(), weights) <
            augmented_tchebycheff(f.row(best).transpose(), weights))
          best = i;
      return best;
    };
    const VectorXd scaled = c * w;
    CHECK(argmin(w) == argmin(scaled / scaled.sum()));
  }
}

TEST_CASE("preference from objectives examples")
{
  CHECK(ts::max_abs(preference_from_objectives(vec({0.5, 0.5})) - vec({0.5, 0.5})) < 1e-15);
  CHECK(ts::max_abs(preference_from_objectives(vec({1.0 / 3, 1.0 / 3, 1.0 / 3})) - VectorXd::Constant(3, 1.0 / 3)) <
        1e-15);
  CHECK(ts::max_abs(preference_from_objectives(vec({0.2, 0.8})) - vec({0.8, 0.2})) < 1e-15);
  CHECK_THROWS_AS(preference_from_objectives(vec({0.2, 0.0})), DomainError);
  CHECK_THROWS_AS(preference_from_objectives(vec({0.2, -0.1})), DomainError);
}

TEST_CASE("preference from objectives is scale invariant and on the simplex")
{
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + trial % 4;
    const VectorXd f = ts::uniform_vector(rng, m, 1e-6, 1.0);
    const VectorXd w = preference_from_objectives(f);
    CHECK(std::abs(w.sum() - 1.0) < 1e-12);
    CHECK(w.minCoeff() > 0.0);
    CHECK(ts::max_abs(preference_from_objectives(3.7 * f) - w) < 1e-12);
    // w_i f_i is constant across objectives
    const VectorXd products = w.cwiseProduct(f);
    CHECK(products.maxCoeff() - products.minCoeff() < 1e-12 * products.maxCoeff());
  }
}

TEST_CASE("Riesz set on a segment is uniform")
{
  const MatrixXd set = generate_preference_set(2, 3, 0);
  REQUIRE(set.rows() == 3);
  std::vector<double> firsts;
  for (Eigen::Index i = 0; i < 3; ++i)
    firsts.push_back(set(i, 0));
  std::sort(firsts.begin(), firsts.end());
  CHECK(std::abs(firsts[0] - 0.0) < 1e-6);
  CHECK(std::abs(firsts[1] - 0.5) < 1e-6);
  CHECK(std::abs(firsts[2] - 1.0) < 1e-6);
}

TEST_CASE("Riesz set for three objectives is at least as spread as the lattice")
{
  const MatrixXd set = generate_preference_set(3, 50, 0);
  CHECK(set.rows() == 50);
  const double lattice = min_pairwise_distance(spread_simplex_points(3, 50));
  CHECK(min_pairwise_distance(set) >= 0.8 * lattice);
  for (Eigen::Index i = 0; i < set.rows(); ++i) {
    CHECK(set.row(i).sum() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(set.row(i).minCoeff() >= 0.0);
  }
  // each vertex has a member close to it
  for (int axis = 0; axis < 3; ++axis)
    CHECK(set.col(axis).maxCoeff() > 0.95);
  CHECK(riesz_energy(set, 9.0) < riesz_energy(spread_simplex_points(3, 50), 9.0));
}

TEST_CASE("preference set generation is deterministic and validates its input")
{
  CHECK(generate_preference_set(3, 20, 7) == generate_preference_set(3, 20, 7));
  CHECK_THROWS_AS(generate_preference_set(3, 2, 0), ConfigError);
  CHECK_THROWS_AS(generate_preference_set(1, 5, 0), ConfigError);
  PreferenceSetOptions lattice;
  lattice.lattice_only = true;
  CHECK(generate_preference_set(3, 10, 0, lattice) == spread_simplex_points(3, 10));
}

TEST_CASE("preference set JSON")
{
  const MatrixXd set = generate_preference_set(4, 12, 3);
  const nlohmann::json j = preference_set_to_json(set, 3);
  CHECK(j.at("seed") == 3);
  CHECK(preference_set_from_json(j) == set);
  CHECK(preference_set_from_json(j.at("vectors")) == set);
  CHECK_THROWS_AS(preference_set_from_json(nlohmann::json::parse("[[0.6, 0.6]]")), ValidationError);
  CHECK_THROWS_AS(preference_set_from_json(nlohmann::json::parse("[[0.5, 0.5], [1.0]]")), ParseError);
  CHECK_THROWS_AS(preference_set_from_json(nlohmann::json::array()), ParseError);
}

TEST_CASE("proposition check examples")
{
  const VectorXd mid = vec({0.5, 0.5});
  CHECK(check_proposition1(mid, {mid}));
  CHECK(check_proposition1(mid, {vec({0.2, 0.8}), vec({0.8, 0.2})}));
  // a dominating candidate breaks the minimum
  CHECK_FALSE(check_proposition1(mid, {vec({0.4, 0.4})}));

  const Problem p = make_mdtlz(MdtlzSpec{Family::Dtlz2, false, 1.0, 0.0, 4, 2});
  const ReferenceFront front = reference_front(MdtlzSpec{Family::Dtlz2, false, 1.0, 0.0, 4, 2}, 9);
  std::vector<VectorXd> xs;
  for (Eigen::Index i = 1; i < front.size() - 1; ++i)
    xs.push_back(front.x.row(i).transpose());
  for (const VectorXd& x : xs)
    CHECK(check_proposition1(p, x, xs));
}

TEST_CASE("proposition holds on random nondominated sets")
{
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + trial % 3;
    const int n = 1 + static_cast<int>(rng() % 20);
    const std::vector<VectorXd> set = ts::nondominated_set(rng, m, n);
    for (const VectorXd& f : set)
      CHECK(check_proposition1(f, set));
  }
}

TEST_CASE("simplex utilities")
{
  CHECK(lattice_size(3, 4) == 15);
  const MatrixXd lattice = simplex_lattice(3, 4);
  CHECK(lattice.rows() == 15);
  CHECK(lattice.row(0) == (Eigen::RowVectorXd(3) << 1, 0, 0).finished());
  CHECK(spread_simplex_points(3, 11).rows() == 11);
  CHECK(ts::max_abs(project_to_simplex(vec({0.2, 0.3, 0.5})) - vec({0.2, 0.3, 0.5})) < 1e-15);
  CHECK(ts::max_abs(project_to_simplex(vec({2.0, 0.0})) - vec({1.0, 0.0})) < 1e-15);
  CHECK(ts::max_abs(project_to_simplex(vec({0.5, 0.5, -1.0})) - vec({0.5, 0.5, 0.0})) < 1e-15);
  const std::vector<Eigen::Index> picked = farthest_point_subset(lattice, 4, {0, 1, 2});
  CHECK(picked.size() == 4);
  CHECK(picked[0] == 0);
  CHECK_THROWS_AS(simplex_lattice(3, 0), ConfigError);
}
