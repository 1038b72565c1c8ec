#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pathsum/engine.hpp"
#include "pathsum/gabp.hpp"
#include "pathsum/graph.hpp"

using pathsum::BlockPartition;
using pathsum::InformationModel;
using pathsum::Matrix;
using pathsum::VertexSubset;

namespace {

pathsum::ModelGraph scalarGraph(const Matrix& j) {
  return pathsum::buildGraph(InformationModel(j), BlockPartition::singletons(j.rows()));
}

}  // namespace

TEST_CASE("tree detection") {
  Matrix path4 = Matrix::Identity(4, 4);
  for (int v = 0; v + 1 < 4; ++v) path4(v, v + 1) = path4(v + 1, v) = 0.2;
  CHECK(pathsum::isTree(scalarGraph(path4)));

  CHECK_FALSE(pathsum::isTree(scalarGraph(oracle::circleFive(0.3))));

  Matrix star = Matrix::Identity(6, 6);
  for (int v = 1; v < 6; ++v) star(0, v) = star(v, 0) = 0.15;
  CHECK(pathsum::isTree(scalarGraph(star)));

  // Two disconnected components, one of them a triangle.
  Matrix mixed = Matrix::Identity(5, 5);
  mixed(0, 1) = mixed(1, 0) = 0.1;
  mixed(2, 3) = mixed(3, 2) = 0.1;
  mixed(3, 4) = mixed(4, 3) = 0.1;
  mixed(2, 4) = mixed(4, 2) = 0.1;
  CHECK_FALSE(pathsum::isTree(scalarGraph(mixed)));
}

TEST_CASE("single vertex marginal") {
  Matrix j(1, 1);
  j << 2.5;
  const auto table = pathsum::gabpMarginals(InformationModel(j));
  CHECK(table.marginalPrecision(0) == 2.5);
  CHECK(table.marginalVariance(0) == 1.0 / 2.5);
}

TEST_CASE("two-vertex tree matches the 2x2 inverse") {
  const double a = 2.0, b = 3.0, c = 0.8;
  Matrix j(2, 2);
  j << a, c, c, b;
  const auto table = pathsum::gabpMarginals(InformationModel(j));
  CHECK_THAT(table.marginalVariance(0),
             Catch::Matchers::WithinRel(1.0 / (a - c * c / b), 1e-14));
  CHECK_THAT(table.marginalVariance(1),
             Catch::Matchers::WithinRel(1.0 / (b - c * c / a), 1e-14));
}

TEST_CASE("random tree marginals match dense inversion") {
  std::mt19937 rng(404);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 15)(rng);
    const Matrix j = oracle::randomTreeMatrix(rng, n);
    const auto table = pathsum::gabpMarginals(InformationModel(j));
    const Matrix sigma = oracle::denseInverse(j);
    for (int v = 0; v < n; ++v) {
      CHECK_THAT(table.marginalVariance(v), Catch::Matchers::WithinRel(sigma(v, v), 1e-10));
    }
  }
}

TEST_CASE("message passing and the path-sum engine agree on trees") {
  std::mt19937 rng(505);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 30)(rng);
    const Matrix j = oracle::randomTreeMatrix(rng, n);
    const InformationModel model(j);
    const auto table = pathsum::gabpMarginals(model);

    const auto graph = scalarGraph(j);
    pathsum::MemoTable memo;
    for (int v = 0; v < n; ++v) {
      const double engineValue =
          pathsum::diagonalEntry(graph, VertexSubset(n), v, memo).value(0, 0);
      CHECK_THAT(1.0 / table.marginalPrecision(v),
                 Catch::Matchers::WithinRel(engineValue, 1e-10));
    }
  }
}

TEST_CASE("marginals are independent of the root choice") {
  std::mt19937 rng(606);
  const int n = 12;
  const Matrix j = oracle::randomTreeMatrix(rng, n);
  const InformationModel model(j);
  const auto reference = pathsum::gabpMarginals(model);
  for (int root : {3, 7, 11}) {
    const auto rerooted = pathsum::gabpMarginals(model, root);
    for (int v = 0; v < n; ++v) {
      CHECK_THAT(rerooted.marginalPrecision(v),
                 Catch::Matchers::WithinRel(reference.marginalPrecision(v), 1e-12));
    }
  }
}

TEST_CASE("a message depends only on the subtree behind it") {
  // Chain 0-1-2-3: the message 1->2 reads only the {0,1} side, so perturbing
  // vertex 3 must not move it at all (same schedule, same arithmetic).
  Matrix j = Matrix::Identity(4, 4) * 2.0;
  for (int v = 0; v + 1 < 4; ++v) j(v, v + 1) = j(v + 1, v) = 0.4;
  const auto before = pathsum::gabpMarginals(InformationModel(j), 0);

  Matrix perturbed = j;
  perturbed(3, 3) = 5.0;
  const auto after = pathsum::gabpMarginals(InformationModel(perturbed), 0);

  CHECK(before.message(1, 2) == after.message(1, 2));
  CHECK(before.message(0, 1) == after.message(0, 1));
  CHECK(before.message(2, 1) != after.message(2, 1));
}

TEST_CASE("loopy graphs are rejected with a topology error") {
  CHECK_THROWS_AS(pathsum::gabpMarginals(InformationModel(oracle::circleFive(0.3))),
                  pathsum::TopologyError);
}

TEST_CASE("nonpositive intermediate precision is a singularity error") {
  Matrix j(2, 2);
  j << 1, 2, 2, 1;  // indefinite: the 1->0 message divides by a negative precision
  CHECK_THROWS_AS(pathsum::gabpMarginals(InformationModel(j)), pathsum::SingularityError);
}

TEST_CASE("forests are handled per component") {
  Matrix j = Matrix::Identity(5, 5) * 2.0;
  j(0, 1) = j(1, 0) = 0.5;
  j(3, 4) = j(4, 3) = -0.7;
  const auto table = pathsum::gabpMarginals(InformationModel(j));
  const Matrix sigma = oracle::denseInverse(j);
  for (int v = 0; v < 5; ++v) {
    CHECK_THAT(table.marginalVariance(v), Catch::Matchers::WithinRel(sigma(v, v), 1e-12));
  }
}
