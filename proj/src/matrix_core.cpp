#include "jgl/matrix_core.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace jgl {

SymMatrix::SymMatrix(Matrix a) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw std::invalid_argument("SymMatrix requires a square matrix with p >= 1");
  }
  m_ = 0.5 * (a + a.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index p) {
  return SymMatrix(Matrix::Identity(p, p));
}

CovarianceSet::CovarianceSet(std::vector<SymMatrix> mats, std::vector<int> counts)
    : s(std::move(mats)), n(std::move(counts)) {
  if (s.empty() || s.size() != n.size()) {
    throw std::invalid_argument("CovarianceSet needs one sample count per matrix");
  }
  const Eigen::Index p = s.front().dim();
  for (const auto& m : s) {
    if (m.dim() != p) {
      throw std::invalid_argument("CovarianceSet matrices must share one dimension");
    }
  }
  for (int nk : n) {
    if (nk < 1) throw std::invalid_argument("CovarianceSet sample counts must be positive");
  }
}

int CovarianceSet::total_samples() const {
  return std::accumulate(n.begin(), n.end(), 0);
}

bool CovarianceSet::diagonals_positive() const {
  for (const auto& m : s) {
    if (m.mat().diagonal().minCoeff() <= 0.0) return false;
  }
  return true;
}

SymMatrix empirical_covariance(const Matrix& samples) {
  if (samples.rows() < 1 || samples.cols() < 1) {
    throw std::invalid_argument("empirical_covariance requires at least one sample and one variable");
  }
  const double n = static_cast<double>(samples.rows());
  return SymMatrix((samples.transpose() * samples) / n);
}

namespace {

// Left-looking dense Cholesky. A pivot at or below 1e-12 * max(diag) counts
// as failure so that numerically indefinite matrices never reach log det.
bool cholesky_lower(const Matrix& a, Matrix& lower) {
  const Eigen::Index p = a.rows();
  const double pivot_floor = 1e-12 * a.diagonal().maxCoeff();
  lower = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double pivot = a(j, j) - lower.row(j).head(j).squaredNorm();
    if (!(pivot > pivot_floor)) return false;
    const double ljj = std::sqrt(pivot);
    lower(j, j) = ljj;
    const Eigen::Index below = p - j - 1;
    if (below > 0) {
      lower.col(j).tail(below) =
          (a.col(j).tail(below) -
           lower.bottomLeftCorner(below, j) * lower.row(j).head(j).transpose()) /
          ljj;
    }
  }
  return true;
}

}  // namespace

std::optional<Matrix> cholesky_factor(const SymMatrix& a) {
  Matrix lower;
  if (!cholesky_lower(a.mat(), lower)) return std::nullopt;
  return lower;
}

LogDetResult cholesky_logdet(const SymMatrix& a) {
  Matrix lower;
  if (!cholesky_lower(a.mat(), lower)) return {0.0, false};
  return {2.0 * lower.diagonal().array().log().sum(), true};
}

SymMatrix invert_pd(const SymMatrix& a) {
  Matrix lower;
  if (!cholesky_lower(a.mat(), lower)) {
    throw std::domain_error("invert_pd: matrix is not positive definite");
  }
  Matrix inv = Matrix::Identity(a.dim(), a.dim());
  lower.triangularView<Eigen::Lower>().solveInPlace(inv);
  lower.transpose().triangularView<Eigen::Upper>().solveInPlace(inv);
  return SymMatrix(std::move(inv));
}

MatrixNorms norms(const SymMatrix& a) {
  const EigenRange range = extreme_eigenvalues(a);
  return {a.mat().norm(), std::max(std::abs(range.min), std::abs(range.max)),
          a.mat().cwiseAbs().maxCoeff()};
}

EigenRange extreme_eigenvalues(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.mat(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("extreme_eigenvalues: eigensolver did not converge");
  }
  const auto& ev = solver.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

Matrix center_columns(const Matrix& samples) {
  return samples.rowwise() - samples.colwise().mean();
}

CovarianceSet covariances_from_dataset(const ClassDataset& data, bool center) {
  std::vector<SymMatrix> mats;
  std::vector<int> counts;
  mats.reserve(data.samples.size());
  for (const Matrix& x : data.samples) {
    mats.push_back(empirical_covariance(center ? center_columns(x) : x));
    counts.push_back(static_cast<int>(x.rows()));
  }
  return CovarianceSet(std::move(mats), std::move(counts));
}

}  // namespace jgl
