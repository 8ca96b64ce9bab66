#include "circuitry/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "circuitry/factorize.hpp"

namespace circuitry {
namespace {

double nonzero_coefficient(RngEngine& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double c = 0.0;
  do {
    c = unit(rng);
  } while (std::abs(c) < 1e-8);
  return c;
}

Matrix gaussian(int rows, int cols, RngEngine& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) g(i, j) = normal(rng);
  return g;
}

}  // namespace

PlantedInstance planted_circuit_matrix(const PlantSpec& spec) {
  const int n = spec.n_cols;
  if (n < 1) throw InputError("need at least one column");
  const double m_exact = spec.rho * n;
  const int m = static_cast<int>(std::lround(m_exact));
  if (std::abs(m_exact - m) > 1e-9)
    throw InputError("rho * n_cols must be an integer, got " + std::to_string(m_exact));
  if (m < 1 || m >= n) throw InputError("rank must land strictly between 0 and n_cols");
  int extra = 0;
  for (int c : spec.sizes) {
    if (c < 2) throw InputError("planted sets need at least two columns");
    if (c > m + 1)
      throw InputError("planted set of size " + std::to_string(c) +
                       " cannot be minimal at rank " + std::to_string(m));
    extra += c - 1;
  }
  const int base = n - static_cast<int>(spec.sizes.size());
  if (base < m)
    throw InputError("not enough independent columns left after planting");
  if (extra > base)
    throw InputError("disjoint source columns do not fit");

  RngEngine rng = stream_rng(spec.seed, 0x9137);
  Matrix cols(m, n);
  cols.leftCols(base) = gaussian(m, base, rng);

  // Sources partition the leading base columns; the combination columns are
  // appended after them and everything is shuffled at the end.
  std::vector<IndexSet> plants;
  int next_source = 0;
  int next_new = base;
  for (int c : spec.sizes) {
    std::vector<int> members;
    Vector combo = Vector::Zero(m);
    for (int j = 0; j < c - 1; ++j) {
      combo += nonzero_coefficient(rng) * cols.col(next_source);
      members.push_back(next_source + 1);
      ++next_source;
    }
    cols.col(next_new) = combo;
    members.push_back(next_new + 1);
    ++next_new;
    plants.emplace_back(members);
  }

  // Shuffle columns; plant membership follows the permutation.
  std::vector<int> where(static_cast<std::size_t>(n));
  std::iota(where.begin(), where.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(where[static_cast<std::size_t>(i)],
              where[uniform_below(rng, static_cast<std::uint64_t>(i + 1))]);

  PlantedInstance out;
  out.a.resize(m, n);
  std::vector<int> new_pos(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.a.col(i) = cols.col(where[static_cast<std::size_t>(i)]);
    new_pos[static_cast<std::size_t>(where[static_cast<std::size_t>(i)])] = i + 1;
  }
  for (const IndexSet& p : plants) {
    std::vector<int> mapped;
    for (int idx : p) mapped.push_back(new_pos[static_cast<std::size_t>(idx - 1)]);
    out.plants.emplace_back(mapped);
  }
  std::sort(out.plants.begin(), out.plants.end());
  return out;
}

PlantedInstance orthonormal_row_instance(const PlantSpec& spec) {
  PlantedInstance inst = planted_circuit_matrix(spec);
  // QR of the transpose: Q's leading columns span the row space, so Q1^T has
  // orthonormal rows and exactly the original kernel.
  Eigen::HouseholderQR<Matrix> qr(inst.a.transpose());
  Matrix thin_q = qr.householderQ() * Matrix::Identity(inst.a.cols(), inst.a.rows());
  inst.a = thin_q.transpose();
  return inst;
}

double plant_near_dependency(Matrix& a, const IndexSet& sources, int target_col,
                             double target_sigma, RngEngine& rng) {
  if (!(target_sigma > 0.0)) throw InputError("target sigma must be positive");
  if (sources.empty()) throw InputError("need at least one source column");
  if (target_col < 1 || target_col > a.cols()) throw InputError("target column out of range");
  if (sources.contains(target_col)) throw InputError("target column cannot be its own source");
  if (sources[sources.size() - 1] > a.cols()) throw InputError("source column out of range");
  if (a.rows() <= sources.size())
    throw InputError("sources already span the whole space, no orthogonal direction left");

  const Matrix b = select_columns(a, sources);
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  std::uniform_int_distribution<int> coin(0, 1);
  Vector c(sources.size());
  for (int j = 0; j < sources.size(); ++j) c(j) = (coin(rng) ? 1.0 : -1.0) * mag(rng);

  // Unit direction orthogonal to the span of the sources.
  Eigen::HouseholderQR<Matrix> qr(b);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector u;
  for (int attempt = 0; attempt < 16; ++attempt) {
    Vector g(a.rows());
    for (int i = 0; i < a.rows(); ++i) g(i) = normal(rng);
    Vector h = qr.householderQ().transpose() * g;
    h.head(sources.size()).setZero();
    u = qr.householderQ() * h;
    const double norm = u.norm();
    if (norm > 1e-8) {
      u /= norm;
      break;
    }
    if (attempt == 15) throw InternalError("could not find an orthogonal direction");
  }

  const IndexSet joined = sources.unioned(IndexSet{target_col});
  double t = target_sigma * std::sqrt(1.0 + c.squaredNorm());
  double achieved = 0.0;
  for (int pass = 0; pass < 3; ++pass) {
    a.col(target_col - 1) = b * c + t * u;
    Eigen::BDCSVD<Matrix> svd(select_columns(a, joined));
    achieved = svd.singularValues()(joined.size() - 1);
    if (std::abs(achieved - target_sigma) <= 1e-9 * target_sigma) break;
    t *= target_sigma / achieved;
  }
  return achieved;
}

PlantedNearInstance planted_near_instance(int n_cols, int m_rows, double target_sigma, int size,
                                          std::uint64_t seed) {
  if (size < 2) throw InputError("near plant needs at least two columns");
  if (m_rows <= size) throw InputError("not enough rows to leave an orthogonal direction");
  if (n_cols < size) throw InputError("not enough columns for the plant");

  RngEngine rng = stream_rng(seed, 0x4e31);
  PlantedNearInstance out;
  out.a = gaussian(m_rows, n_cols, rng);
  IndexSet plant = random_subset(n_cols, size, rng);
  const int target = plant[plant.size() - 1];
  out.achieved_sigma =
      plant_near_dependency(out.a, plant.without(target), target, target_sigma, rng);
  out.plant = plant;
  return out;
}

SigmaStats baseline_sigma_stats(const Matrix& a, int subset_cols, int samples, RngEngine& rng) {
  if (subset_cols < 1 || subset_cols > a.cols()) throw InputError("subset size out of range");
  if (samples < 30) throw InputError("need at least 30 samples for a stable spread");
  double sum = 0.0;
  double sumsq = 0.0;
  for (int s = 0; s < samples; ++s) {
    const IndexSet cols = random_subset(static_cast<int>(a.cols()), subset_cols, rng);
    Eigen::BDCSVD<Matrix> svd(select_columns(a, cols));
    const double sig = (a.rows() < subset_cols) ? 0.0 : svd.singularValues()(subset_cols - 1);
    sum += sig;
    sumsq += sig * sig;
  }
  SigmaStats out;
  out.mu = sum / samples;
  out.sigma_hat = std::sqrt(std::max(0.0, (sumsq - samples * out.mu * out.mu) / (samples - 1)));
  return out;
}

}  // namespace circuitry
