#pragma once

#include <optional>
#include <vector>

#include "circuitry/matrix.hpp"

namespace circuitry {

struct RankEstimate {
  int rank = 0;
  std::vector<double> singular_values;  // descending, min(M,N) entries
};

/// Numerical rank: number of singular values above rank_tol_factor * sigma_max.
RankEstimate estimate_rank(const Matrix& a, const Tolerances& tol);

/// Row-orthonormal factorization A(:,perm) = L * Q with a column permutation
/// chosen so the trailing `rank` columns of Q form a well-conditioned square
/// block. Q is stored in permuted column order; perm[j] is the original
/// 1-based column index sitting at permuted position j+1.
struct Factorization {
  int rank = 0;
  Matrix q;  // rank x N, orthonormal rows
  Matrix l;  // M x rank
  std::vector<int> perm;
  std::optional<Matrix> qstar;  // rank x (N - rank), set by ensure_qstar

  int cols() const { return static_cast<int>(q.cols()); }
  int original_column(int permuted_pos) const { return perm[static_cast<std::size_t>(permuted_pos - 1)]; }
  std::vector<int> inverse_perm() const;
};

Factorization lq_factor(const Matrix& a, const Tolerances& tol);

struct NullBasis {
  Matrix basis;  // cols(B) x nullity, orthonormal columns
  int nullity = 0;
};

/// Orthonormal basis of the (numerical) kernel of B, from the right singular
/// vectors whose singular values fall at or below the rank threshold.
NullBasis null_space_basis(const Matrix& b, const Tolerances& tol);

/// The kernel basis C = [I; -X] (N x (N-m)) built from the coefficient
/// block X solving Q2 * X = Q1, so that A(:,perm) * C = 0.
Matrix fundamental_null_basis(const Factorization& f);

/// Computes and caches f.qstar.
void ensure_qstar(Factorization& f);

/// 1-based indices whose magnitude exceeds support_tol_factor * max|v_i|.
/// Rejects the zero vector.
IndexSet support(const Vector& v, const Tolerances& tol);

/// Singular values counted per column: the usual min(M,N) computed values,
/// padded with zeros up to N when the matrix is wider than tall. Descending.
std::vector<double> column_singular_values(const Matrix& a);

/// Maps a set of permuted-position indices to original column numbers.
IndexSet map_through_perm(const IndexSet& positions, const std::vector<int>& perm);

/// Inverse of map_through_perm.
IndexSet map_to_positions(const IndexSet& original, const std::vector<int>& inverse_perm);

}  // namespace circuitry
