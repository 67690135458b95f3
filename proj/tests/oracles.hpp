#pragma once

#include "jgl/matrix_core.hpp"

#include <random>
#include <vector>

namespace jgl::testing {

/// Seeded generator for test fixtures.
struct TestRng {
  std::mt19937_64 eng;

  explicit TestRng(std::uint64_t seed) : eng(seed) {}

  double uniform(double lo, double hi);
  Matrix matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi);
  Matrix symmetric(Eigen::Index p, double lo, double hi);
  /// B^T B + ridge I for a random B; strictly PD for ridge > 0.
  Matrix spd(Eigen::Index p, double ridge);
};

/// Eigenvalues by cyclic Jacobi rotations, ascending. A deliberately separate
/// route from the library's eigensolver.
std::vector<double> jacobi_eigenvalues(const Matrix& a);

/// 1/2 sum (t-a)^2 + a1 sum |t_k| + a2 sum_{k != l} |t_k - t_l|
/// (ordered pairs, matching the penalty definition).
double fused_objective(const std::vector<double>& t, const std::vector<double>& a, double a1,
                       double a2);

/// 1/2 sum (t-a)^2 + a1 sum |t_k| + a2 sqrt(sum t_k^2).
double group_objective(const std::vector<double>& t, const std::vector<double>& a, double a1,
                       double a2);

/// ADMM minimizer of fused_objective: consensus splitting with scalar
/// soft-threshold subproblems and a closed-form (rank-one corrected) theta
/// update. Iterated to ~1e-11 residuals.
std::vector<double> admm_fused_oracle(const std::vector<double>& a, double a1, double a2);

/// ADMM minimizer of group_objective: two consensus copies, one handled by
/// scalar soft thresholds and one by the plain l2-norm prox, so the combined
/// penalty is never proxed in one shot. Iterated to ~1e-11 residuals.
std::vector<double> admm_group_oracle(const std::vector<double>& a, double a1, double a2);

}  // namespace jgl::testing
