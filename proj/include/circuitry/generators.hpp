#pragma once

#include <cstdint>
#include <vector>

#include "circuitry/matrix.hpp"
#include "circuitry/rng.hpp"

namespace circuitry {

struct PlantSpec {
  int n_cols = 0;
  double rho = 0.0;              // rank as a fraction of n_cols, rho * n_cols integral
  std::vector<int> sizes;        // planted dependent sets, each of size >= 2
  std::uint64_t seed = 0;
};

struct PlantedInstance {
  Matrix a;                      // rank * n_cols, rank = rho * n_cols
  std::vector<IndexSet> plants;  // planted sets after the column shuffle
};

/// Random rank-deficient matrix with known minimal dependent sets. Base
/// columns are standard Gaussian; each plant replaces nothing but appends a
/// column that is a nonzero combination of its own disjoint source columns.
/// Columns are shuffled afterwards, so plant positions carry no signal.
PlantedInstance planted_circuit_matrix(const PlantSpec& spec);

/// Same instance reduced to orthonormal rows, which leaves the kernel and
/// therefore the dependent sets untouched.
PlantedInstance orthonormal_row_instance(const PlantSpec& spec);

/// Overwrites column target_col with (sources combination) + t * u where u is
/// a unit vector orthogonal to the span of the sources, with t tuned so the
/// smallest singular value of the touched column set lands on target_sigma.
/// Returns the achieved value.
double plant_near_dependency(Matrix& a, const IndexSet& sources, int target_col,
                             double target_sigma, RngEngine& rng);

struct PlantedNearInstance {
  Matrix a;           // m_rows x n_cols, dense Gaussian background
  IndexSet plant;     // the near-dependent set, |plant| = size
  double achieved_sigma = 0.0;
};

/// Gaussian matrix with one planted near-dependent column set of the given
/// size whose smallest singular value sits at target_sigma.
PlantedNearInstance planted_near_instance(int n_cols, int m_rows, double target_sigma, int size,
                                          std::uint64_t seed);

struct SigmaStats {
  double mu = 0.0;
  double sigma_hat = 0.0;  // sample standard deviation
};

/// Mean and spread of sigma_min over random column subsets of a fixed size.
SigmaStats baseline_sigma_stats(const Matrix& a, int subset_cols, int samples, RngEngine& rng);

}  // namespace circuitry
