#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "jgl/jgl_solver.hpp"
#include "jgl/matrix_core.hpp"
#include "jgl/prox_ops.hpp"
#include "jgl/solver_core.hpp"

namespace jgl {

/// assignments[k][i] is the fold index of sample i in class k.
using FoldAssignments = std::vector<std::vector<int>>;

struct CvPlan {
  int folds = 5;
  std::vector<std::pair<double, double>> grid;  // (lambda1, lambda2) pairs
  std::uint64_t seed = 0;
  PenaltyKind kind = PenaltyKind::fused;
  Algorithm algorithm = Algorithm::ista;  // gista is rejected: the grid is 2-D
  bool center = true;
  int jobs = 1;
};

struct CvResult {
  std::vector<double> scores;  // parallel to plan.grid; +inf marks failed fits
  std::size_t best_index = 0;
  std::pair<double, double> best{0.0, 0.0};
  FoldAssignments fold_assignments;
};

/// Per-class seeded shuffle, then round-robin assignment, so fold sizes within
/// a class differ by at most one. Throws when folds exceeds some class size,
/// naming the class.
FoldAssignments make_folds(const ClassDataset& data, int folds, std::uint64_t seed);

/// CV score of a held-out fold given the training-fold fit:
/// sum_k n_k tr(S_d^(k) Theta_k) - logdet Theta_k, with n_k the full class
/// size and S_d the covariance of the test fold alone (centered by the test
/// fold's own mean when centering is on).
double cv_fold_score(const ClassDataset& data, const FoldAssignments& folds, int fold,
                     const PrecisionSet& estimate, bool center);

/// Grid x fold fits (parallel across plan.jobs threads), scores summed over
/// folds per the CV display. best is the argmin; ties break toward the
/// smallest lambda1, then the smallest lambda2. The result is identical for
/// any jobs count: tasks land in preassigned slots and are reduced in order.
CvResult cross_validate(const ClassDataset& data, const CvPlan& plan, const SolverOptions& opts);

/// One grid axis, either an explicit comma list ("0.05,0.1,0.2") or a
/// log-spaced range ("log:COUNT:MIN:MAX"). `what` names the flag in errors.
std::vector<double> parse_grid_axis(const std::string& text, const std::string& what);

}  // namespace jgl
