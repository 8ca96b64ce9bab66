#pragma once

#include <optional>
#include <vector>

#include "circuitry/factorize.hpp"
#include "circuitry/matrix.hpp"

namespace circuitry {

/// A minimal linearly dependent set of columns together with the null vector
/// witnessing the dependency. The witness has length N (full column count),
/// unit norm, support equal to `indices`, and its first supported entry is
/// positive so representations are canonical.
struct Circuit {
  IndexSet indices;
  Vector witness;

  int size() const { return indices.size(); }
};

struct CircuitCheck {
  bool is_circuit = false;
  std::optional<Vector> witness;  // length = a.cols(), only set when is_circuit
};

/// J is a circuit of A iff A(:,J) has a one-dimensional kernel whose
/// generator vanishes nowhere on J.
CircuitCheck is_circuit(const Matrix& a, const IndexSet& j, const Tolerances& tol);

/// Canonicalize in place: unit norm, first entry above the support threshold
/// made positive.
void normalize_witness(Vector& w, const Tolerances& tol);

/// Columns that belong to no circuit at all: those sitting at trailing
/// permuted positions whose row of Q* vanishes identically. Returned in
/// original column numbering. Requires ensure_qstar(f) beforehand.
IndexSet prunable_columns(const Factorization& f, const Tolerances& tol);

/// Assembles the circuit named by a kernel vector w of Q*(K2c, K1): the K1
/// entries where w is supported plus the trailing columns where Q*(K2,K1)*w
/// is supported, mapped back through perm to original column numbers.
IndexSet circuit_from_qstar_witness(const IndexSet& k_permuted, const Vector& w,
                                    const Matrix& qstar, const std::vector<int>& perm,
                                    const Tolerances& tol);

/// Exhaustive enumeration of circuits up to max_size, in lexicographic order.
/// Guard rails: cols(A) <= 24 and max_size <= 8, since the scan is
/// combinatorial. Intended as the reference oracle for small instances.
std::vector<Circuit> brute_force_circuits(const Matrix& a, int max_size, const Tolerances& tol);

}  // namespace circuitry
