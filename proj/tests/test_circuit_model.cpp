#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "circuitry/circuits.hpp"
#include "circuitry/factorize.hpp"
#include "circuitry/generators.hpp"
#include "circuitry/rng.hpp"

using namespace circuitry;

namespace {

Matrix two_by_three() {
  Matrix a(2, 3);
  a << 1, 0, 1, 0, 1, 1;
  return a;
}

// Independent formulation: every proper subset independent, the set itself
// rank deficient by exactly one.
bool minimal_dependent_by_ranks(const Matrix& a, const IndexSet& j, const Tolerances& tol) {
  if (estimate_rank(select_columns(a, j), tol).rank != j.size() - 1) return false;
  for (int k = 0; k < j.size(); ++k) {
    const IndexSet sub = j.without(j[k]);
    if (sub.empty()) continue;
    if (estimate_rank(select_columns(a, sub), tol).rank != sub.size()) return false;
  }
  return true;
}

// Third formulation: the set is dependent and every member column lies in
// the span of the others (least squares residual vanishes).
bool every_column_redundant(const Matrix& a, const IndexSet& j, const Tolerances& tol) {
  if (estimate_rank(select_columns(a, j), tol).rank == j.size()) return false;
  for (int k = 0; k < j.size(); ++k) {
    const IndexSet rest = j.without(j[k]);
    if (rest.empty()) return false;
    const Matrix b = select_columns(a, rest);
    const Vector target = a.col(j[k] - 1);
    const Vector coef = b.colPivHouseholderQr().solve(target);
    if ((b * coef - target).norm() > 1e-8 * std::max(1.0, target.norm())) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("three dependent columns form a circuit with the expected witness") {
  const Matrix a = two_by_three();
  const Tolerances tol = Tolerances::for_shape(2, 3);
  CircuitCheck c = is_circuit(a, IndexSet{1, 2, 3}, tol);
  REQUIRE(c.is_circuit);
  REQUIRE(c.witness.has_value());
  const double r3 = 1.0 / std::sqrt(3.0);
  CHECK((*c.witness)(0) == doctest::Approx(r3).epsilon(1e-12));
  CHECK((*c.witness)(1) == doctest::Approx(r3).epsilon(1e-12));
  CHECK((*c.witness)(2) == doctest::Approx(-r3).epsilon(1e-12));

  CHECK_FALSE(is_circuit(a, IndexSet{1, 2}, tol).is_circuit);
  CHECK_FALSE(is_circuit(a, IndexSet{1, 3}, tol).is_circuit);
  CHECK_FALSE(is_circuit(a, IndexSet{1}, tol).is_circuit);
}

TEST_CASE("duplicate and zero columns give the smallest circuits") {
  const Tolerances tol = Tolerances::for_shape(3, 3);
  Matrix a(3, 3);
  a.col(0) << 1, 2, 3;
  a.col(1) = 2 * a.col(0);
  a.col(2) << 0, 0, 0;

  CircuitCheck pair = is_circuit(a, IndexSet{1, 2}, tol);
  REQUIRE(pair.is_circuit);
  CHECK((*pair.witness)(0) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));
  CHECK((*pair.witness)(1) == doctest::Approx(-1.0 / std::sqrt(5.0)).epsilon(1e-12));
  CHECK((*pair.witness)(2) == 0.0);

  CircuitCheck zero = is_circuit(a, IndexSet{3}, tol);
  REQUIRE(zero.is_circuit);
  CHECK((*zero.witness)(2) == doctest::Approx(1.0));

  // A set strictly containing a dependency is not minimal.
  CHECK_FALSE(is_circuit(a, IndexSet{1, 2, 3}, tol).is_circuit);
}

TEST_CASE("witness canonicalization fixes norm and sign") {
  const Tolerances tol = Tolerances::for_shape(4, 4);
  Vector w(4);
  w << -3.0, 0.0, 4.0, 0.0;
  normalize_witness(w, tol);
  CHECK(w.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w(0) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(w(2) == doctest::Approx(-0.8).epsilon(1e-12));
  Vector again = w;
  normalize_witness(again, tol);
  CHECK((again - w).norm() == 0.0);
}

TEST_CASE("three circuit formulations agree on planted instances") {
  PlantSpec spec;
  spec.n_cols = 14;
  spec.rho = 0.5;
  spec.sizes = {2, 3, 4};
  spec.seed = 404;
  const PlantedInstance inst = planted_circuit_matrix(spec);
  const Tolerances tol = resolve_tolerances(inst.a);

  for (const IndexSet& plant : inst.plants) {
    CHECK(is_circuit(inst.a, plant, tol).is_circuit);
    CHECK(minimal_dependent_by_ranks(inst.a, plant, tol));
    CHECK(every_column_redundant(inst.a, plant, tol));
  }

  // Random small sets almost surely agree on "not a circuit" too.
  RngEngine rng = stream_rng(5, 0);
  for (int rep = 0; rep < 40; ++rep) {
    const IndexSet j = random_subset(spec.n_cols, 3, rng);
    const bool a = is_circuit(inst.a, j, tol).is_circuit;
    const bool b = minimal_dependent_by_ranks(inst.a, j, tol);
    const bool c = every_column_redundant(inst.a, j, tol);
    CHECK(a == b);
    CHECK(a == c);
  }
}

TEST_CASE("witness support equals the circuit exactly") {
  PlantSpec spec;
  spec.n_cols = 12;
  spec.rho = 0.5;
  spec.sizes = {4};
  spec.seed = 77;
  const PlantedInstance inst = planted_circuit_matrix(spec);
  const Tolerances tol = resolve_tolerances(inst.a);
  const CircuitCheck c = is_circuit(inst.a, inst.plants.front(), tol);
  REQUIRE(c.is_circuit);
  CHECK(support(*c.witness, tol) == inst.plants.front());
  CHECK(c.witness->size() == 12);
  CHECK((inst.a * *c.witness).norm() < 1e-10);
}

TEST_CASE("exhaustive scan finds exactly the planted circuits") {
  PlantSpec spec;
  spec.n_cols = 10;
  spec.rho = 0.6;
  spec.sizes = {2, 3};
  spec.seed = 1234;
  const PlantedInstance inst = planted_circuit_matrix(spec);
  const Tolerances tol = resolve_tolerances(inst.a);

  const std::vector<Circuit> found = brute_force_circuits(inst.a, 4, tol);
  REQUIRE(found.size() == 2);
  CHECK(found[0].indices == inst.plants[0]);
  CHECK(found[1].indices == inst.plants[1]);
  for (const Circuit& c : found) {
    CHECK(is_circuit(inst.a, c.indices, tol).is_circuit);
    CHECK((inst.a * c.witness).norm() < 1e-10);
  }
  // Lexicographic report order.
  for (std::size_t i = 1; i < found.size(); ++i) CHECK(found[i - 1].indices < found[i].indices);

  CHECK_THROWS_AS(brute_force_circuits(Matrix::Zero(2, 30), 3, tol), InputError);
  CHECK_THROWS_AS(brute_force_circuits(inst.a, 9, tol), InputError);
}

TEST_CASE("circuits form an antichain") {
  PlantSpec spec;
  spec.n_cols = 11;
  spec.rho = 6.0 / 11.0;
  spec.sizes = {3, 3};
  spec.seed = 9;
  const PlantedInstance inst = planted_circuit_matrix(spec);
  const Tolerances tol = resolve_tolerances(inst.a);
  const std::vector<Circuit> all = brute_force_circuits(inst.a, 5, tol);
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = 0; j < all.size(); ++j)
      if (i != j) CHECK_FALSE(all[i].indices.contains_all(all[j].indices));
}

TEST_CASE("columns outside every circuit are exactly the prunable ones") {
  // Block layout: {1,2,3} is the only circuit, columns 4 and 5 are free.
  Matrix a(4, 5);
  a.setZero();
  a(0, 0) = 1;
  a(1, 1) = 1;
  a(0, 2) = 1;
  a(1, 2) = 1;
  a(2, 3) = 1;
  a(3, 4) = 1;
  const Tolerances tol = resolve_tolerances(a);
  Factorization f = lq_factor(a, tol);
  ensure_qstar(f);
  CHECK(prunable_columns(f, tol) == IndexSet{4, 5});

  // Dense planted instance: kernel touches everything, nothing prunable.
  PlantSpec spec;
  spec.n_cols = 12;
  spec.rho = 0.5;
  spec.sizes = {3};
  spec.seed = 31;
  const PlantedInstance inst = planted_circuit_matrix(spec);
  Factorization g = lq_factor(inst.a, resolve_tolerances(inst.a));
  ensure_qstar(g);
  CHECK(prunable_columns(g, resolve_tolerances(inst.a)).empty());
}

TEST_CASE("a leading position and its coefficient rows assemble a circuit") {
  PlantSpec spec;
  spec.n_cols = 12;
  spec.rho = 0.75;
  spec.sizes = {3};
  spec.seed = 2024;
  const PlantedInstance inst = planted_circuit_matrix(spec);
  const Tolerances tol = resolve_tolerances(inst.a);
  Factorization f = lq_factor(inst.a, tol);
  ensure_qstar(f);
  const int lead = f.cols() - f.rank;  // leading (dependent-side) positions

  for (int p = 1; p <= lead; ++p) {
    // K pairs the leading position with every trailing row its coefficient
    // column touches; the witness w = (1) is then a kernel vector of the
    // untouched rows by construction.
    std::vector<int> k_members{p};
    const IndexSet rows = support(f.qstar->col(p - 1), tol);
    for (int i : rows) k_members.push_back(lead + i);
    const IndexSet k(k_members);
    Vector w(1);
    w << 1.0;
    const IndexSet j = circuit_from_qstar_witness(k, w, *f.qstar, f.perm, tol);
    CHECK(is_circuit(inst.a, j, tol).is_circuit);
    CHECK(j.contains(f.original_column(p)));
    CHECK(j.size() == k.size());
  }
}
