#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace circuitry {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised for malformed user input: bad dimensions, unreadable files,
/// out-of-domain parameters. The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an internal consistency check fails (e.g. a factorization
/// block that should be invertible is not). Indicates a bug or a badly
/// conditioned matrix, not a usage mistake.
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sorted set of 1-based column (or row) indices.
class IndexSet {
 public:
  IndexSet() = default;

  explicit IndexSet(std::vector<int> indices) : idx_(std::move(indices)) {
    std::sort(idx_.begin(), idx_.end());
    idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
    if (!idx_.empty() && idx_.front() < 1)
      throw InputError("index sets are 1-based; got index " + std::to_string(idx_.front()));
  }

  IndexSet(std::initializer_list<int> indices) : IndexSet(std::vector<int>(indices)) {}

  static IndexSet full(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i + 1;
    IndexSet s;
    s.idx_ = std::move(v);
    return s;
  }

  int size() const { return static_cast<int>(idx_.size()); }
  bool empty() const { return idx_.empty(); }

  // 0-based position access into the sorted index list.
  int operator[](int pos) const { return idx_[static_cast<std::size_t>(pos)]; }

  bool contains(int index) const {
    return std::binary_search(idx_.begin(), idx_.end(), index);
  }

  bool contains_all(const IndexSet& other) const {
    return std::includes(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end());
  }

  IndexSet complement(int n) const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(n) - idx_.size());
    auto it = idx_.begin();
    for (int i = 1; i <= n; ++i) {
      if (it != idx_.end() && *it == i) {
        ++it;
      } else {
        out.push_back(i);
      }
    }
    IndexSet s;
    s.idx_ = std::move(out);
    return s;
  }

  IndexSet unioned(const IndexSet& other) const {
    std::vector<int> out;
    out.reserve(idx_.size() + other.idx_.size());
    std::set_union(idx_.begin(), idx_.end(), other.idx_.begin(), other.idx_.end(),
                   std::back_inserter(out));
    IndexSet s;
    s.idx_ = std::move(out);
    return s;
  }

  IndexSet without(int index) const {
    std::vector<int> out;
    out.reserve(idx_.size());
    for (int v : idx_)
      if (v != index) out.push_back(v);
    IndexSet s;
    s.idx_ = std::move(out);
    return s;
  }

  const std::vector<int>& values() const { return idx_; }
  auto begin() const { return idx_.begin(); }
  auto end() const { return idx_.end(); }

  friend bool operator==(const IndexSet& a, const IndexSet& b) { return a.idx_ == b.idx_; }
  friend bool operator!=(const IndexSet& a, const IndexSet& b) { return a.idx_ != b.idx_; }
  // Lexicographic, so circuit lists have a canonical order.
  friend bool operator<(const IndexSet& a, const IndexSet& b) { return a.idx_ < b.idx_; }

  std::string to_string() const {
    std::string s = "{";
    for (std::size_t i = 0; i < idx_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(idx_[i]);
    }
    return s + "}";
  }

 private:
  std::vector<int> idx_;
};

/// Relative thresholds used for rank decisions and support extraction.
/// Both are factors: a singular value counts as nonzero when it exceeds
/// rank_tol_factor * sigma_max, an entry belongs to the support when its
/// magnitude exceeds support_tol_factor * max|v_i|.
struct Tolerances {
  double rank_tol_factor = 0.0;
  double support_tol_factor = 0.0;

  static Tolerances for_shape(Eigen::Index rows, Eigen::Index cols) {
    const double f =
        std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(rows, cols));
    return Tolerances{f, f};
  }

  void validate() const {
    if (!(rank_tol_factor > 0.0) || !(rank_tol_factor < 1e-3) ||
        !(support_tol_factor > 0.0) || !(support_tol_factor < 1e-3))
      throw InputError("tolerance factors must lie in (0, 1e-3)");
  }
};

inline Tolerances resolve_tolerances(const Matrix& a, const Tolerances* maybe = nullptr) {
  if (maybe != nullptr && maybe->rank_tol_factor > 0.0) {
    maybe->validate();
    return *maybe;
  }
  return Tolerances::for_shape(a.rows(), a.cols());
}

inline void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) throw InputError(std::string(what) + ": non-finite entry");
}

inline Matrix select_columns(const Matrix& a, const IndexSet& cols) {
  Matrix out(a.rows(), cols.size());
  for (int j = 0; j < cols.size(); ++j) {
    if (cols[j] > a.cols())
      throw InputError("column index " + std::to_string(cols[j]) + " out of range");
    out.col(j) = a.col(cols[j] - 1);
  }
  return out;
}

inline Matrix select_rows(const Matrix& a, const IndexSet& rows) {
  Matrix out(rows.size(), a.cols());
  for (int i = 0; i < rows.size(); ++i) {
    if (rows[i] > a.rows())
      throw InputError("row index " + std::to_string(rows[i]) + " out of range");
    out.row(i) = a.row(rows[i] - 1);
  }
  return out;
}

inline Vector select_entries(const Vector& v, const IndexSet& idx) {
  Vector out(idx.size());
  for (int i = 0; i < idx.size(); ++i) out[i] = v[idx[i] - 1];
  return out;
}

}  // namespace circuitry
