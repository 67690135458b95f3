#pragma once

#include "jgl/matrix_core.hpp"
#include "jgl/prox_ops.hpp"
#include "jgl/solver_core.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace jgl {

enum class Algorithm { ista, mista, gista };

/// Analytic envelope for the optimum and the iterates: lambda_c with the
/// per-class spectral lower bounds and the shared upper bound, plus the
/// iterate corridor [m, M] evaluated against the best available reference.
struct BoundDiagnostics {
  double lambda_c = 0.0;
  std::vector<double> lower;  // per class, <= ||Theta*_k||_2
  double upper = 0.0;         // >= ||Theta*_k||_2 for every class
  double iterate_lower = 0.0;  // m
  double iterate_upper = 0.0;  // M
};

struct FitResult {
  PrecisionSet estimate;
  SolverReport report;
  BoundDiagnostics bounds;
};

/// Proximal gradient with backtracking on the joint objective.
FitResult fit_ista(const CovarianceSet& data, const PenaltySpec& spec, const SolverOptions& opts,
                   const std::optional<PrecisionSet>& t0 = std::nullopt);

/// Proximal gradient with the self-concordant damped step alpha_t; the
/// curvature estimate L halves whenever alpha_t exceeds 1.
FitResult fit_mista(const CovarianceSet& data, const PenaltySpec& spec, const SolverOptions& opts,
                    const std::optional<PrecisionSet>& t0 = std::nullopt);

/// Single-class graphical lasso (unweighted log-likelihood, off-diagonal l1)
/// with soft-threshold prox, BB step seeding, and duality-gap stopping.
FitResult fit_gista(const SymMatrix& s, double lambda, const SolverOptions& opts,
                    const std::optional<Matrix>& t0 = std::nullopt);

/// Gap between the primal objective at theta and the dual value at
/// U = proj(theta^{-1} - S) onto the dual-feasible box (off-diagonal entries
/// clamped to [-lambda, lambda], diagonal forced to 0 since the penalty
/// excludes it). Returns +inf when S + U is not positive definite.
double duality_gap(const Matrix& theta, const SymMatrix& s, double lambda);

/// lambda_c and the spectral-norm sandwich for the optimum.
BoundDiagnostics solution_bounds(const CovarianceSet& data, const PenaltySpec& spec);

/// Iterate corridor: M = ||Theta_0||_F + 2 ||Theta*||_F over the stacked set,
/// m = exp(-F(Theta_0)/max_k n_k) * M^(1 - K p), clamped away from underflow.
std::pair<double, double> iterate_bounds(const PrecisionSet& t0, const CovarianceSet& data,
                                         const PenaltySpec& spec, const PrecisionSet& t_star);

}  // namespace jgl
