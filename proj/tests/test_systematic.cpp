#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>

#include "circuitry/circuits.hpp"
#include "circuitry/factorize.hpp"
#include "circuitry/generators.hpp"
#include "circuitry/systematic.hpp"

using namespace circuitry;

namespace {

Matrix gaussian(int rows, int cols, std::uint64_t seed) {
  RngEngine rng = stream_rng(seed, 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) g(i, j) = normal(rng);
  return g;
}

double witness_residual(const Matrix& a, const Circuit& c) {
  return (a * c.witness).norm() / a.norm();
}

}  // namespace

TEST_CASE("block partition covers every column exactly once") {
  RngEngine rng = stream_rng(42, 0);
  const Partition p = choose_partition(100, 70, 5, rng);
  CHECK(p.r == 8);
  CHECK(p.k == 12);
  REQUIRE(p.blocks.size() == 8);
  // 100 = 4 * 13 + 4 * 12, larger blocks first.
  for (int b = 0; b < 8; ++b) CHECK(p.blocks[b].size() == (b < 4 ? 13 : 12));
  std::set<int> seen;
  for (const auto& block : p.blocks)
    for (int c : block) seen.insert(c);
  CHECK(seen.size() == 100);
  CHECK(*seen.begin() == 1);
  CHECK(*seen.rbegin() == 100);

  // r = 8 is the first block count whose 5-block unions fit inside rank+1
  // columns: ceil(100/7) = 15 gives 75 > 71, ceil(100/8) = 13 gives 65 <= 71.
  CHECK(5 * 15 > 71);
  CHECK(5 * 13 <= 71);

  RngEngine rng2 = stream_rng(42, 0);
  const Partition q = choose_partition(10, 5, 2, rng2);
  CHECK(q.r == 4);
  CHECK(q.k == 2);
  REQUIRE(q.blocks.size() == 4);
  for (int b = 0; b < 4; ++b) CHECK(q.blocks[b].size() == (b < 2 ? 3 : 2));
}

TEST_CASE("partition rejects shapes it cannot serve") {
  RngEngine rng = stream_rng(1, 0);
  CHECK_THROWS_AS(choose_partition(10, 10, 2, rng), InputError);
  CHECK_THROWS_AS(choose_partition(10, 5, 0, rng), InputError);
  try {
    choose_partition(10, 4, 6, rng);
    FAIL("expected a size complaint");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("no feasible block count") != std::string::npos);
  }
}

TEST_CASE("scan cost formulas") {
  const CostEstimate even = systematic_cost_estimate(0.5, 3);
  CHECK(even.context_size == 3);
  CHECK(even.subset_count == doctest::Approx(20.0).epsilon(1e-12));  // C(6,3)
  CHECK(even.growth_base == doctest::Approx(2.0).epsilon(1e-12));

  const CostEstimate tall = systematic_cost_estimate(0.7, 5);
  CHECK(tall.context_size == 11);  // floor(5 * 0.7 / 0.3)
  CHECK(tall.subset_count == doctest::Approx(4368.0).epsilon(1e-12));  // C(16,11)

  const CostEstimate sparse = systematic_cost_estimate(0.3, 5);
  CHECK(sparse.context_size == 2);
  CHECK(sparse.subset_count == doctest::Approx(21.0).epsilon(1e-12));  // C(7,2)
  CHECK(sparse.growth_base == doctest::Approx(1.8420).epsilon(1e-3));

  CHECK_THROWS_AS(systematic_cost_estimate(0.0, 3), InputError);
  CHECK_THROWS_AS(systematic_cost_estimate(1.0, 3), InputError);
  CHECK_THROWS_AS(systematic_cost_estimate(0.5, 0), InputError);
}

TEST_CASE("systematic scan recovers a planted dependency") {
  const PlantedInstance inst = planted_circuit_matrix(PlantSpec{20, 0.5, {3}, 777});
  const Tolerances tol = Tolerances::for_shape(inst.a.rows(), inst.a.cols());
  RngEngine rng = stream_rng(5, 0);
  const CircuitFindResult res = circuitfind(inst.a, 3, tol, rng);
  REQUIRE(res.found);
  CHECK(res.circuit->indices == inst.plants[0]);
  CHECK(witness_residual(inst.a, *res.circuit) < 1e-9);
  CHECK(res.max_depth == 0);
  CHECK(res.subsets_examined >= 1);
  // No recursion and no one-column-short shortcut, so one kernel per subset.
  CHECK(res.nullspace_evals == res.subsets_examined);
}

TEST_CASE("certificate of absence matches exhaustive enumeration") {
  const Matrix a = gaussian(8, 12, 123);
  const Tolerances tol = Tolerances::for_shape(8, 12);
  CHECK(brute_force_circuits(a, 4, tol).empty());
  RngEngine rng = stream_rng(6, 0);
  const CircuitFindResult res = circuitfind(a, 4, tol, rng);
  CHECK_FALSE(res.found);
  // Full scan over C(6,4) unions of 4 blocks out of 6.
  CHECK(res.subsets_examined == 15);
  CHECK(res.nullspace_evals == 15);
  CHECK(res.max_depth == 0);
}

TEST_CASE("nested kernels trigger the recursive branch") {
  const PlantedInstance inst = planted_circuit_matrix(PlantSpec{12, 2.0 / 3.0, {3, 3}, 302});
  const Tolerances tol = Tolerances::for_shape(inst.a.rows(), inst.a.cols());
  RngEngine rng = stream_rng(8, 0);
  const CircuitFindResult res = circuitfind(inst.a, 3, tol, rng);
  REQUIRE(res.found);
  // This seed pair routes the scan through a subset holding both plants.
  CHECK(res.max_depth >= 1);
  const bool hit_plant =
      res.circuit->indices == inst.plants[0] || res.circuit->indices == inst.plants[1];
  CHECK(hit_plant);
  CHECK(witness_residual(inst.a, *res.circuit) < 1e-9);
  CHECK(res.nullspace_evals >= res.subsets_examined);
}

TEST_CASE("one extra column goes straight to the kernel support test") {
  const Matrix a = gaussian(4, 5, 55);
  const Tolerances tol = Tolerances::for_shape(4, 5);
  RngEngine rng = stream_rng(7, 0);
  const CircuitFindResult wide = circuitfind(a, 5, tol, rng);
  REQUIRE(wide.found);
  CHECK(wide.circuit->indices.size() == 5);  // generic kernel vector has full support
  CHECK(wide.nullspace_evals == 1);
  CHECK(wide.subsets_examined == 0);

  RngEngine rng2 = stream_rng(7, 0);
  const CircuitFindResult tight = circuitfind(a, 4, tol, rng2);
  CHECK_FALSE(tight.found);
  CHECK(tight.nullspace_evals == 1);
}

TEST_CASE("independent columns certify instantly") {
  const Matrix a = gaussian(6, 4, 91);
  const Tolerances tol = Tolerances::for_shape(6, 4);
  RngEngine rng = stream_rng(3, 0);
  const CircuitFindResult res = circuitfind(a, 2, tol, rng);
  CHECK_FALSE(res.found);
  CHECK(res.nullspace_evals == 0);
  CHECK(res.subsets_examined == 0);
}

TEST_CASE("target sizes beyond rank plus one are rejected") {
  const Matrix a = gaussian(4, 8, 17);
  const Tolerances tol = Tolerances::for_shape(4, 8);
  RngEngine rng = stream_rng(2, 0);
  CHECK_THROWS_AS(circuitfind(a, 6, tol, rng), InputError);
  CHECK_THROWS_AS(circuitfind(a, 0, tol, rng), InputError);
}

TEST_CASE("rerunning with one seed reproduces every field") {
  const PlantedInstance inst = planted_circuit_matrix(PlantSpec{16, 0.5, {4}, 4242});
  const Tolerances tol = Tolerances::for_shape(inst.a.rows(), inst.a.cols());
  RngEngine r1 = stream_rng(9, 0);
  RngEngine r2 = stream_rng(9, 0);
  const CircuitFindResult a = circuitfind(inst.a, 4, tol, r1);
  const CircuitFindResult b = circuitfind(inst.a, 4, tol, r2);
  REQUIRE(a.found == b.found);
  REQUIRE(a.found);
  CHECK(a.circuit->indices == b.circuit->indices);
  CHECK(a.circuit->witness == b.circuit->witness);
  CHECK(a.nullspace_evals == b.nullspace_evals);
  CHECK(a.subsets_examined == b.subsets_examined);
  CHECK(a.max_depth == b.max_depth);
}

TEST_CASE("systematic and exhaustive search agree on small instances") {
  int found_count = 0;
  for (int trial = 0; trial < 30; ++trial) {
    Matrix a;
    if (trial % 2 == 0) {
      std::vector<int> sizes = (trial % 4 == 0) ? std::vector<int>{3} : std::vector<int>{4, 3};
      a = planted_circuit_matrix(PlantSpec{14, 0.5, sizes, 9000u + trial}).a;
    } else {
      a = gaussian(7, 13, 9100u + trial);
    }
    const Tolerances tol = Tolerances::for_shape(a.rows(), a.cols());
    const auto oracle = brute_force_circuits(a, 4, tol);
    RngEngine rng = stream_rng(60u + trial, 0);
    const CircuitFindResult res = circuitfind(a, 4, tol, rng);
    REQUIRE(res.found == !oracle.empty());
    if (res.found) {
      ++found_count;
      const bool listed = std::any_of(oracle.begin(), oracle.end(), [&](const Circuit& c) {
        return c.indices == res.circuit->indices;
      });
      CHECK(listed);
      CHECK(witness_residual(a, *res.circuit) < 1e-9);
    }
  }
  CHECK(found_count == 15);  // every planted instance, none of the noise ones
}
