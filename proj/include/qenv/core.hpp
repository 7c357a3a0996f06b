#pragma once

// Problem representation: sensing matrices, sparse signals, supports and
// noisy measurement instances, plus the least-squares oracle solution.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qenv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Length-n real signal (ground truth, iterates, shadow points) or length-m
/// measurement vector.
using SignalVector = Vector;

inline constexpr const char* kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Seeding

/// SplitMix64 finalizer. Used to derive independent stream seeds from a
/// master seed so that adding trials or noise levels never shifts others.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0) noexcept {
  return mix_seed(mix_seed(mix_seed(master) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

// ---------------------------------------------------------------------------
// Matrix statistics

struct MatrixStats {
  double op_norm = 0.0;       // largest singular value
  double max_col_norm = 0.0;  // max_i ||a_i||_2
};

namespace detail {

inline double largest_singular_value_dense(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

// Power iteration on the smaller Gram matrix. Falls back to a dense
// symmetric eigensolve if the iteration has not settled.
inline double op_norm_power(const Matrix& a, double rel_tol = 1e-10,
                            int max_iter = 20000) {
  const bool wide = a.cols() > a.rows();
  const Matrix gram = wide ? Matrix(a * a.transpose()) : Matrix(a.transpose() * a);
  const Eigen::Index d = gram.rows();
  Vector v = Vector::Ones(d) / std::sqrt(static_cast<double>(d));
  // Perturb the start deterministically so it is not orthogonal to the top
  // eigenvector for structured inputs.
  for (Eigen::Index i = 0; i < d; ++i) v(i) += 1e-3 * static_cast<double>((i * 7919) % 13);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = gram * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    const double next = v.dot(w);
    v = w / nw;
    if (it > 2 && std::abs(next - lambda) <= 1e-3 * rel_tol * std::abs(next)) {
      // For symmetric G the eigenvalue error is bounded by ||r||^2 / gap.
      Vector r = gram * v - next * v;
      if (r.norm() <= 1e-6 * next) return std::sqrt(next);
    }
    lambda = next;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues()(d - 1)));
}

}  // namespace detail

/// Spectral norm by power iteration on A^T A (or A A^T), cross-checked against
/// a dense SVD when min(m, n) <= 64. The column norm maximum is exact.
inline MatrixStats matrix_stats(const Matrix& a) {
  MatrixStats s;
  if (a.size() == 0) return s;
  s.max_col_norm = a.colwise().norm().maxCoeff();
  s.op_norm = detail::op_norm_power(a);
  if (std::min(a.rows(), a.cols()) <= 64) {
    const double dense = detail::largest_singular_value_dense(a);
    if (std::abs(dense - s.op_norm) > 1e-10 * dense) s.op_norm = dense;
  }
  return s;
}

// ---------------------------------------------------------------------------
// SensingMatrix

/// Dense m x n measurement operator with cached norms. Immutable.
class SensingMatrix {
 public:
  SensingMatrix() = default;

  explicit SensingMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 1 || entries_.cols() < 1)
      throw std::invalid_argument("SensingMatrix: m and n must be >= 1");
    if (!entries_.allFinite())
      throw std::invalid_argument("SensingMatrix: entries must be finite");
    stats_ = matrix_stats(entries_);
  }

  const Matrix& entries() const noexcept { return entries_; }
  Eigen::Index m() const noexcept { return entries_.rows(); }
  Eigen::Index n() const noexcept { return entries_.cols(); }
  double op_norm() const noexcept { return stats_.op_norm; }
  double max_col_norm() const noexcept { return stats_.max_col_norm; }
  const MatrixStats& stats() const noexcept { return stats_; }

  auto col(Eigen::Index i) const { return entries_.col(i); }

 private:
  Matrix entries_;
  MatrixStats stats_;
};

inline MatrixStats matrix_stats(const SensingMatrix& a) { return a.stats(); }

// ---------------------------------------------------------------------------
// SupportSet

/// Sorted set of distinct indices into [0, n).
class SupportSet {
 public:
  SupportSet() = default;

  explicit SupportSet(std::vector<Eigen::Index> idx) : idx_(std::move(idx)) {
    std::sort(idx_.begin(), idx_.end());
    if (std::adjacent_find(idx_.begin(), idx_.end()) != idx_.end())
      throw std::invalid_argument("SupportSet: duplicate index");
    if (!idx_.empty() && idx_.front() < 0)
      throw std::invalid_argument("SupportSet: negative index");
  }

  SupportSet(std::initializer_list<Eigen::Index> idx)
      : SupportSet(std::vector<Eigen::Index>(idx)) {}

  /// Indices with |x_j| > threshold.
  static SupportSet of(const Vector& x, double threshold = 0.0) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < x.size(); ++j)
      if (std::abs(x(j)) > threshold) idx.push_back(j);
    SupportSet s;
    s.idx_ = std::move(idx);
    return s;
  }

  const std::vector<Eigen::Index>& indices() const noexcept { return idx_; }
  std::size_t size() const noexcept { return idx_.size(); }
  bool empty() const noexcept { return idx_.empty(); }
  bool contains(Eigen::Index j) const {
    return std::binary_search(idx_.begin(), idx_.end(), j);
  }
  auto begin() const noexcept { return idx_.begin(); }
  auto end() const noexcept { return idx_.end(); }

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<Eigen::Index> idx_;
};

inline std::size_t cardinality(const Vector& x, double threshold = 0.0) {
  std::size_t c = 0;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (std::abs(x(j)) > threshold) ++c;
  return c;
}

// ---------------------------------------------------------------------------
// ProblemInstance

struct ProblemInstance {
  SensingMatrix a;
  SignalVector x0;
  SignalVector epsilon;
  SignalVector b;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Generators

/// i.i.d. standard normal columns scaled to unit Euclidean norm.
inline SensingMatrix generate_sensing_matrix(Eigen::Index m, Eigen::Index n,
                                             std::uint64_t seed) {
  if (m < 1 || n < 1)
    throw std::invalid_argument("generate_sensing_matrix: m and n must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    int redraws = 0;
    for (;;) {
      for (Eigen::Index i = 0; i < m; ++i) a(i, j) = normal(rng);
      const double nrm = a.col(j).norm();
      if (nrm > 0.0 && std::isfinite(nrm)) {
        a.col(j) /= nrm;
        break;
      }
      if (++redraws > 10)
        throw std::runtime_error("generate_sensing_matrix: zero-norm column redraw limit");
    }
  }
  return SensingMatrix(std::move(a));
}

struct GroundTruth {
  SignalVector x0;
  SupportSet support;
};

/// K-sparse signal with uniform random support, magnitudes uniform on
/// [lo, hi] and random signs. A positive target_norm rescales the whole
/// vector to that Euclidean norm (magnitudes may then leave [lo, hi]).
inline GroundTruth generate_ground_truth(Eigen::Index n, Eigen::Index k, double lo,
                                         double hi, double target_norm,
                                         std::uint64_t seed) {
  if (n < 0 || k < 0) throw std::invalid_argument("generate_ground_truth: negative size");
  if (k > n) throw std::invalid_argument("generate_ground_truth: K > n");
  if (!(lo > 0.0) || !(hi >= lo))
    throw std::invalid_argument("generate_ground_truth: need 0 < lo <= hi");
  if (!(target_norm >= 0.0))
    throw std::invalid_argument("generate_ground_truth: target_norm must be >= 0");

  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  // Partial Fisher-Yates: first k entries form a uniform k-subset.
  for (Eigen::Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
  }
  std::vector<Eigen::Index> chosen(perm.begin(), perm.begin() + k);
  std::sort(chosen.begin(), chosen.end());

  std::uniform_real_distribution<double> mag(lo, hi);
  std::bernoulli_distribution sign(0.5);
  SignalVector x0 = SignalVector::Zero(n);
  for (Eigen::Index j : chosen) {
    const double v = (lo == hi) ? lo : mag(rng);
    x0(j) = sign(rng) ? v : -v;
  }
  if (target_norm > 0.0 && k > 0) x0 *= target_norm / x0.norm();
  return {std::move(x0), SupportSet(std::move(chosen))};
}

/// b = A x0 + eps with eps Gaussian, rescaled to have exactly noise_norm.
inline ProblemInstance synthesize_measurements(const SensingMatrix& a, const SignalVector& x0,
                                               double noise_norm, std::uint64_t seed) {
  if (x0.size() != a.n())
    throw std::invalid_argument("synthesize_measurements: x0 length != n");
  if (!(noise_norm >= 0.0))
    throw std::invalid_argument("synthesize_measurements: noise_norm must be >= 0");
  SignalVector eps = SignalVector::Zero(a.m());
  if (noise_norm > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    do {
      for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = normal(rng);
    } while (eps.norm() == 0.0);
    eps *= noise_norm / eps.norm();
  }
  SignalVector b = a.entries() * x0 + eps;
  return {a, x0, std::move(eps), std::move(b), seed};
}

// ---------------------------------------------------------------------------
// Least squares

/// Least-squares solution supported on S (minimum-norm if A_S is rank
/// deficient); exactly zero off S.
inline SignalVector oracle_solution(const SensingMatrix& a, const SignalVector& b,
                                    const SupportSet& s) {
  if (b.size() != a.m()) throw std::invalid_argument("oracle_solution: b length != m");
  SignalVector x = SignalVector::Zero(a.n());
  if (s.empty()) return x;
  if (s.indices().back() >= a.n())
    throw std::invalid_argument("oracle_solution: support index out of range");
  Matrix as(a.m(), static_cast<Eigen::Index>(s.size()));
  Eigen::Index c = 0;
  for (Eigen::Index j : s) as.col(c++) = a.col(j);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(as);
  const Vector xs = cod.solve(b);
  c = 0;
  for (Eigen::Index j : s) x(j) = xs(c++);
  return x;
}

/// Minimum-norm least-squares solution of A x = b over all of R^n.
inline SignalVector least_squares_solution(const SensingMatrix& a, const SignalVector& b) {
  if (b.size() != a.m())
    throw std::invalid_argument("least_squares_solution: b length != m");
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a.entries());
  return cod.solve(b);
}

}  // namespace qenv
