#pragma once

#include "jgl/matrix_core.hpp"
#include "jgl/prox_ops.hpp"

#include <optional>
#include <vector>

namespace jgl {

/// K stacked precision matrices; accepted solver iterates keep every block
/// symmetric positive definite.
using PrecisionSet = std::vector<Matrix>;

enum class StopRule { relative_error, objective_error };
enum class StepInit { barzilai_borwein, safe, fixed };
enum class SolverStatus { converged, max_iterations, numerical_failure };

struct SolverOptions {
  double eps = 1e-5;
  int max_iter = 500;
  double backtrack_c = 0.5;   // step shrink factor, in (0,1)
  double eta0 = 1.0;          // first-iteration step, also the fixed step
  StopRule stop_rule = StopRule::relative_error;
  StepInit step_init = StepInit::barzilai_borwein;
  std::optional<double> f_star;  // reference optimum, required by objective_error
  int backtrack_cap = 50;
  int halving_cap = 60;
  bool track_spectral = false;  // record max_k ||Theta_t||_2 per iterate
};

struct SolverReport {
  SolverStatus status = SolverStatus::max_iterations;
  int iterations = 0;
  std::vector<double> objective_trace;  // F(Theta_t), t = 0..iterations
  std::vector<double> f_trace;          // smooth part, aligned with objective_trace
  std::vector<double> step_trace;       // eta_t (ISTA) or alpha_t (M-ISTA) per step
  std::vector<int> backtrack_counts;    // shrinks (ISTA) or halvings (M-ISTA) per step
  std::vector<double> quad_trace;       // ISTA: Q_eta at acceptance, aligned with step_trace
  std::vector<double> spectral_trace;   // max_k ||Theta_t||_2 when tracked
  double final_relative_error = 0.0;
  double final_objective = 0.0;
  double duality_gap = -1.0;  // single-class runs only
};

struct ObjectiveValue {
  double total = 0.0;    // F = f + g
  double smooth = 0.0;   // f
  double penalty = 0.0;  // g
};

double frobenius_sq(const PrecisionSet& a);
double inner_product(const PrecisionSet& a, const PrecisionSet& b);

/// Sum_k ||next_k - prev_k||_F / max(Sum_k ||prev_k||_F, 1).
double relative_change(const PrecisionSet& next, const PrecisionSet& prev);

/// f = Sum_k n_k (tr(S_k T_k) - logdet T_k), or nullopt if some block is not
/// positive definite (backtracking probes indefinite candidates routinely).
std::optional<double> smooth_value(const PrecisionSet& theta, const CovarianceSet& data);

/// lambda1 * offdiagonal l1 plus the fused or group coupling term.
double penalty_value(const PrecisionSet& theta, const PenaltySpec& spec);

/// Full objective split; throws std::domain_error if a block is not PD.
ObjectiveValue jgl_objective(const PrecisionSet& theta, const CovarianceSet& data,
                             const PenaltySpec& spec);

/// Per-class blocks n_k (S_k - T_k^{-1}); throws std::domain_error on non-PD.
PrecisionSet jgl_gradient(const PrecisionSet& theta, const CovarianceSet& data);

/// Q_eta(next, cur) = f(cur) + <next - cur, grad f(cur)> + ||next - cur||_F^2 / (2 eta),
/// given precomputed f(cur) and gradient.
double quadratic_model_at(const PrecisionSet& next, const PrecisionSet& cur, double f_cur,
                          const PrecisionSet& grad, double eta);

/// Convenience overload that evaluates f and the gradient itself.
double quadratic_model(const PrecisionSet& next, const PrecisionSet& cur,
                       const CovarianceSet& data, double eta);

/// min_k lambda_min(T_k)^2; positive for PD iterates.
double safe_step(const PrecisionSet& theta);

/// Pooled BB1 step <dT, dT> / <dT, dGrad> across blocks; a non-positive
/// denominator falls back to the safe step of cur. Floored at 1e-12.
double bb_step(const PrecisionSet& prev, const PrecisionSet& cur, const PrecisionSet& grad_prev,
               const PrecisionSet& grad_cur);

struct BacktrackResult {
  PrecisionSet next;
  double eta = 0.0;
  int tries = 0;        // rejected candidates before acceptance
  bool accepted = false;
  double f_next = 0.0;  // smooth value at the accepted candidate
  double quad = 0.0;    // Q_eta(next, cur) at acceptance
};

/// One ISTA step: shrink eta by c until prox_penalty(cur - eta grad, eta) is
/// PD in every class and f(candidate) <= Q_eta; after `cap` rejections retry
/// once with the safe step, then give up (accepted=false).
BacktrackResult backtrack_step(const PrecisionSet& cur, const CovarianceSet& data,
                               const PenaltySpec& spec, double eta0, double c, int cap = 50);

/// Same search with f(cur) and grad f(cur) already in hand (the solver loop
/// evaluates them once per iteration anyway, for step seeding).
BacktrackResult backtrack_step_at(const PrecisionSet& cur, double f_cur, const PrecisionSet& grad,
                                  const CovarianceSet& data, const PenaltySpec& spec, double eta0,
                                  double c, int cap);

struct ScStep {
  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  bool converged = false;  // d == 0: prox fixed point reached
};

/// Self-concordant step for direction d at curvature estimate L:
/// beta = L Sum_k ||d_k||_F^2, lambda = Sum_k n_k ||T_k^{-1} d_k||_F,
/// alpha = beta / (lambda (lambda + beta)).
ScStep sc_step(const PrecisionSet& theta, const PrecisionSet& d, double L,
               const CovarianceSet& data);

/// Variant reusing precomputed block inverses.
ScStep sc_step_with_inverses(const PrecisionSet& d, double L, const CovarianceSet& data,
                             const std::vector<SymMatrix>& inverses);

/// Selected stopping rule; objective_error requires f_star and throws
/// std::invalid_argument without it.
bool stopping(const PrecisionSet& prev, const PrecisionSet& cur, StopRule rule, double f_cur,
              std::optional<double> f_star, double eps);

/// Diagonal start (diag(S_k) + lambda1 I)^{-1}, PD by construction.
PrecisionSet default_initial_point(const CovarianceSet& data, double lambda1);

}  // namespace jgl
