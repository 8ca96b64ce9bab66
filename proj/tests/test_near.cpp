#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "circuitry/factorize.hpp"
#include "circuitry/generators.hpp"
#include "circuitry/near.hpp"

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

// Three unit-ish columns where the third nearly equals the average of the
// first two, plus a clean fourth direction.
Matrix almost_dependent_triple() {
  Matrix a = Matrix::Zero(3, 4);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;
  a(0, 2) = a(1, 2) = 1.0 / std::sqrt(2.0);
  a(2, 2) = 1e-3;
  a(2, 3) = 1.0;
  return a;
}

}  // namespace

TEST_CASE("concentration bound formula") {
  CHECK(witness_concentration_bound(0.1, 1.0) == doctest::Approx(0.01 / 0.99).epsilon(1e-12));
  CHECK(witness_concentration_bound(0.0, 2.0) == 0.0);
  CHECK_THROWS_AS(witness_concentration_bound(0.5, 0.5), InputError);
  CHECK_THROWS_AS(witness_concentration_bound(1.1, 1.0), InputError);
  CHECK_THROWS_AS(witness_concentration_bound(-0.1, 1.0), InputError);
}

TEST_CASE("truncation bound formula") {
  CHECK(truncation_quality_bound(0.0, 2.0, 0.1) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(truncation_quality_bound(0.3, 5.0, 0.0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(truncation_quality_bound(0.3, 5.0, 1.0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK_THROWS_AS(truncation_quality_bound(0.3, 5.0, 1.5), InputError);
  CHECK_THROWS_AS(truncation_quality_bound(0.3, 5.0, -0.1), InputError);
  CHECK_THROWS_AS(truncation_quality_bound(-1.0, 5.0, 0.5), InputError);
}

TEST_CASE("spectral split counts the surviving directions") {
  Matrix a = Matrix::Zero(3, 5);
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  a(2, 2) = 0.01;
  const Tolerances tol = Tolerances::for_shape(3, 5);

  const SpectralSplit s = spectral_split(a, 0.1, tol);
  CHECK(s.m == 2);
  REQUIRE(s.sigmas.size() == 5);
  CHECK(s.sigmas[2] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(s.sigmas[3] == 0.0);  // wider than tall, padded
  CHECK(s.sigmas[4] == 0.0);

  const SpectralSplit deep = spectral_split(a, 1e-5, tol);
  CHECK(deep.m == 3);
  CHECK(spectral_split(a, 5.0, tol).m == 0);

  for (double eps : {0.01, 1.0}) {
    try {
      spectral_split(a, eps, tol);
      FAIL("expected a separation complaint");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("does not separate") != std::string::npos);
    }
  }
}

TEST_CASE("near circuit verification accepts the planted triple only") {
  const Matrix a = almost_dependent_triple();
  const Tolerances tol = Tolerances::for_shape(3, 4);

  const NearCircuitCheck hit = verify_near_circuit(a, IndexSet{1, 2, 3}, 0.01, tol);
  REQUIRE(hit.ok);
  CHECK(hit.sigma_in <= 7.08e-4);
  CHECK(hit.sigma_in >= 5e-4);
  CHECK(hit.sigma_out_min >= 0.4);
  REQUIRE(hit.near.has_value());
  CHECK(hit.near->witness.size() == 4);
  CHECK(hit.near->witness(3) == 0.0);
  CHECK((a * hit.near->witness).norm() == doctest::Approx(hit.sigma_in).epsilon(1e-9));

  // A pair of orthonormal columns is nowhere near dependent.
  const NearCircuitCheck pair = verify_near_circuit(a, IndexSet{1, 2}, 0.01, tol);
  CHECK_FALSE(pair.ok);
  CHECK(pair.sigma_in == doctest::Approx(1.0).epsilon(1e-12));

  // The full set fails minimality: dropping column 4 leaves a small sigma.
  const NearCircuitCheck fat = verify_near_circuit(a, IndexSet{1, 2, 3, 4}, 0.01, tol);
  CHECK_FALSE(fat.ok);
  CHECK(fat.sigma_in == 0.0);  // four columns in three rows
  CHECK(fat.sigma_out_min <= 7.08e-4);
}

TEST_CASE("a single short column is a near circuit on its own") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1e-3;
  a(1, 1) = 1.0;
  const Tolerances tol = Tolerances::for_shape(2, 2);
  const NearCircuitCheck chk = verify_near_circuit(a, IndexSet{1}, 0.01, tol);
  REQUIRE(chk.ok);
  CHECK(chk.sigma_in == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(chk.sigma_out_min == std::numeric_limits<double>::infinity());
  CHECK(std::abs(chk.near->witness(0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("verification rejects malformed queries") {
  const Matrix a = almost_dependent_triple();
  const Tolerances tol = Tolerances::for_shape(3, 4);
  CHECK_THROWS_AS(verify_near_circuit(a, IndexSet{}, 0.01, tol), InputError);
  CHECK_THROWS_AS(verify_near_circuit(a, IndexSet{9}, 0.01, tol), InputError);
  CHECK_THROWS_AS(verify_near_circuit(a, IndexSet{1}, 0.0, tol), InputError);
}

TEST_CASE("near search recovers a planted almost-dependent set") {
  const PlantedNearInstance inst = planted_near_instance(30, 20, 1e-4, 4, 2026);
  REQUIRE(inst.achieved_sigma == doctest::Approx(1e-4).epsilon(1e-6));

  NearSearchConfig cfg;
  cfg.max_size = 4;
  cfg.epsilon = 1e-3;
  cfg.delta = 0.05;
  cfg.seed = 3;
  const NearSearchOutcome out = near_search(inst.a, cfg);
  REQUIRE(out.status == SearchStatus::Found);
  REQUIRE(out.near.has_value());
  CHECK(out.near->indices == inst.plant);
  CHECK(out.near->sigma_in == doctest::Approx(inst.achieved_sigma).epsilon(1e-6));
  CHECK(out.near->sigma_out_min > 1.0);
  CHECK(out.split_m == 20);
  CHECK(out.rejected_candidates == 0);
  CHECK_FALSE(out.truncated);
  // Every first draw holds the exact kernel direction of 21 columns in 20
  // rows next to the planted one, so a hit can only come out of the shrink
  // step dropping back to a single small direction.
  CHECK(out.state.trials == 6);
  CHECK((inst.a * out.near->witness).norm() <= cfg.epsilon);
}

TEST_CASE("near search stops once the escape probability is certified") {
  const PlantedNearInstance inst = planted_near_instance(30, 20, 1e-4, 4, 2026);
  NearSearchConfig cfg;
  cfg.max_size = 4;
  cfg.epsilon = 1e-3;
  cfg.delta = 0.05;
  cfg.seed = 8;  // this stream never lands on the plant before the cutoff
  const NearSearchOutcome out = near_search(inst.a, cfg);
  CHECK(out.status == SearchStatus::NotFound);
  CHECK_FALSE(out.near.has_value());
  CHECK(out.state.trials == 13);
  CHECK(out.state.p <= cfg.delta);
  CHECK(out.state.p > 0.0);

  cfg.max_trials = 2;
  const NearSearchOutcome cut = near_search(inst.a, cfg);
  CHECK(cut.truncated);
  CHECK(cut.state.trials == 2);
  CHECK(cut.state.p > cfg.delta);
}

TEST_CASE("near search is reproducible and thread count neutral") {
  const PlantedNearInstance inst = planted_near_instance(30, 20, 1e-4, 4, 2026);
  NearSearchConfig cfg;
  cfg.max_size = 4;
  cfg.epsilon = 1e-3;
  cfg.delta = 0.05;
  cfg.seed = 1;
  const NearSearchOutcome a = near_search(inst.a, cfg);
  const NearSearchOutcome b = near_search(inst.a, cfg);
  cfg.threads = 3;
  const NearSearchOutcome c = near_search(inst.a, cfg);
  REQUIRE(a.status == SearchStatus::Found);
  for (const NearSearchOutcome* o : {&b, &c}) {
    CHECK(o->status == a.status);
    CHECK(o->state.trials == a.state.trials);
    CHECK(o->state.p == a.state.p);
    CHECK(o->near->indices == a.near->indices);
    CHECK(o->near->witness == a.near->witness);
  }
}

TEST_CASE("near search validates its inputs") {
  const Matrix tall = gaussian(8, 6, 5);
  NearSearchConfig cfg;
  cfg.max_size = 3;
  cfg.epsilon = 1e-3;
  CHECK_THROWS_AS(near_search(tall, cfg), InputError);

  const Matrix square = gaussian(5, 5, 6);
  NearSearchConfig tiny;
  tiny.max_size = 2;
  tiny.epsilon = 1e-8;  // below every singular value, so nothing is admissible
  CHECK_THROWS_AS(near_search(square, tiny), InputError);

  const Matrix wide = gaussian(4, 8, 7);
  NearSearchConfig bad = {};
  bad.epsilon = 1e-3;
  bad.max_size = 0;
  CHECK_THROWS_AS(near_search(wide, bad), InputError);
  bad.max_size = 3;
  bad.delta = 0.0;
  CHECK_THROWS_AS(near_search(wide, bad), InputError);
}

TEST_CASE("bottom singular vector mass concentrates as the bounds predict") {
  const PlantedNearInstance inst = planted_near_instance(30, 20, 1e-4, 4, 2026);
  const IndexSet sample = inst.plant.unioned(IndexSet{1, 9, 25});
  REQUIRE(sample.size() == 7);
  const Matrix b = select_columns(inst.a, sample);
  Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double sigma_small = sv(6);
  const double sigma_second = sv(5);
  const double eps = 2e-4;  // the planted witness clears this level
  REQUIRE(sigma_small <= eps);
  REQUIRE(sigma_second > eps);

  const Vector v = svd.matrixV().col(6);
  double off_mass = 0.0;
  for (int j = 0; j < sample.size(); ++j)
    if (!inst.plant.contains(sample[j])) off_mass += v(j) * v(j);
  CHECK(off_mass <= witness_concentration_bound(eps, sigma_second) + 1e-10);

  // Restricting v to the planted positions and renormalizing stays within
  // the predicted residual growth.
  Vector t = v;
  for (int j = 0; j < sample.size(); ++j)
    if (!inst.plant.contains(sample[j])) t(j) = 0.0;
  t.normalize();
  const double resid = (b * t).norm();
  CHECK(resid <= truncation_quality_bound(sigma_small, sv(0), std::sqrt(off_mass)) + 1e-10);
}

TEST_CASE("bisection narrows in on the smallest workable epsilon") {
  const PlantedNearInstance inst = planted_near_instance(30, 20, 1e-4, 4, 2026);
  const BisectionResult bi = minimal_epsilon_bisection(inst.a, 4, 0.05, 1, 1e-6, 0.1, 20);
  REQUIRE(bi.near.has_value());
  CHECK(bi.near->indices == inst.plant);
  CHECK(bi.epsilon_star >= inst.achieved_sigma * (1.0 - 1e-9));
  CHECK(bi.epsilon_star <= inst.achieved_sigma * 1.01);
  CHECK(bi.total_trials > 0);
}

TEST_CASE("bisection reports nothing on a clean instance") {
  const Matrix a = gaussian(6, 8, 77);
  const auto sigmas = column_singular_values(a);
  const double hi = sigmas[5] * 0.5;
  const BisectionResult bi = minimal_epsilon_bisection(a, 3, 0.05, 11, 1e-8, hi, 12);
  CHECK_FALSE(bi.near.has_value());
  CHECK(bi.epsilon_star == doctest::Approx(hi).epsilon(1e-12));
  CHECK(bi.total_trials > 0);
}

TEST_CASE("bisection validates its range") {
  const Matrix a = gaussian(4, 6, 9);
  CHECK_THROWS_AS(minimal_epsilon_bisection(a, 3, 0.05, 1, 0.0, 0.1), InputError);
  CHECK_THROWS_AS(minimal_epsilon_bisection(a, 3, 0.05, 1, 0.2, 0.1), InputError);
  CHECK_THROWS_AS(minimal_epsilon_bisection(a, 3, 0.05, 1, 1e-4, 0.1, 0), InputError);
}
