#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace jgl {

using Matrix = Eigen::MatrixXd;

/// Dense symmetric matrix. Construction symmetrizes via (A + A^T)/2 so that
/// every consumer can rely on exact entrywise symmetry, which repeated
/// gradient/prox updates would otherwise erode through rounding.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix a);

  static SymMatrix identity(Eigen::Index p);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

/// Per-class sample matrices (n_k x p), class order fixed by position.
struct ClassDataset {
  std::vector<Matrix> samples;

  int classes() const { return static_cast<int>(samples.size()); }
  Eigen::Index dim() const { return samples.front().cols(); }
};

/// K empirical covariance matrices with per-class sample counts.
struct CovarianceSet {
  std::vector<SymMatrix> s;
  std::vector<int> n;

  CovarianceSet(std::vector<SymMatrix> mats, std::vector<int> counts);

  int classes() const { return static_cast<int>(s.size()); }
  Eigen::Index dim() const { return s.front().dim(); }
  int total_samples() const;

  /// Strict positivity of every diagonal entry; the JGL problem has a unique
  /// optimum only under this condition, so solvers check it up front.
  bool diagonals_positive() const;
};

struct LogDetResult {
  double value = 0.0;
  bool positive_definite = false;
};

struct MatrixNorms {
  double frobenius = 0.0;
  double spectral = 0.0;
  double max_abs = 0.0;
};

struct EigenRange {
  double min = 0.0;
  double max = 0.0;
};

/// (1/n) * X^T X for a mean-centered n x p sample matrix X.
SymMatrix empirical_covariance(const Matrix& samples);

/// Lower Cholesky factor, or nullopt when a pivot falls at or below
/// 1e-12 * max(diag). Backtracking probes indefinite candidates every inner
/// iteration, so failure is an ordinary result here, not an error.
std::optional<Matrix> cholesky_factor(const SymMatrix& a);

/// log det via Cholesky; positive_definite=false (value undefined) when the
/// factorization fails.
LogDetResult cholesky_logdet(const SymMatrix& a);

/// Inverse through the Cholesky factor. Throws std::domain_error when the
/// input is not positive definite: callers of the inverse require PD.
SymMatrix invert_pd(const SymMatrix& a);

MatrixNorms norms(const SymMatrix& a);

EigenRange extreme_eigenvalues(const SymMatrix& a);

/// Column means subtracted per class; used when ingesting raw samples.
Matrix center_columns(const Matrix& samples);

CovarianceSet covariances_from_dataset(const ClassDataset& data, bool center);

}  // namespace jgl
