#include "jgl/jgl_solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace jgl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_options(const SolverOptions& opts) {
  if (!(opts.eps > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (opts.max_iter < 1) throw std::invalid_argument("max iterations must be at least 1");
  if (!(opts.backtrack_c > 0.0) || !(opts.backtrack_c < 1.0)) {
    throw std::invalid_argument("backtracking constant must lie in (0,1)");
  }
  if (!(opts.eta0 > 0.0)) throw std::invalid_argument("initial step must be positive");
  if (opts.stop_rule == StopRule::objective_error && !opts.f_star) {
    throw std::invalid_argument("objective_error stopping needs a reference optimum");
  }
}

double spectral_max(const PrecisionSet& theta) {
  double m = 0.0;
  for (const Matrix& t : theta) m = std::max(m, norms(SymMatrix(t)).spectral);
  return m;
}

PrecisionSet starting_point(const CovarianceSet& data, double lambda1,
                            const std::optional<PrecisionSet>& t0) {
  PrecisionSet theta = t0 ? *t0 : default_initial_point(data, lambda1);
  if (theta.size() != static_cast<std::size_t>(data.classes())) {
    throw std::invalid_argument("initial point class count mismatch");
  }
  for (const Matrix& t : theta) {
    if (!cholesky_logdet(SymMatrix(t)).positive_definite) {
      throw std::invalid_argument("initial point must be positive definite");
    }
  }
  return theta;
}

BoundDiagnostics solution_bounds_raw(const CovarianceSet& data, double l1, double l2) {
  if (!data.diagonals_positive()) {
    throw std::domain_error("solution bounds need strictly positive covariance diagonals");
  }
  BoundDiagnostics b;
  const double k = static_cast<double>(data.classes());
  const double p = static_cast<double>(data.dim());
  b.lambda_c = std::sqrt(k * l1 * l1 + 2.0 * k * l1 * l2 + l2 * l2);
  double inv_diag_sum = 0.0;
  for (int c = 0; c < data.classes(); ++c) {
    const double nk = data.n[c];
    b.lower.push_back(nk / (p * b.lambda_c + nk * norms(data.s[c]).spectral));
    for (Eigen::Index i = 0; i < data.dim(); ++i) inv_diag_sum += 1.0 / data.s[c](i, i);
  }
  b.upper = data.total_samples() * p / l1 + inv_diag_sum;
  return b;
}

std::pair<double, double> iterate_corridor(double f0, double n_max, double kp, double norm0,
                                           double norm_star) {
  const double big = norm0 + 2.0 * norm_star;
  const double log_small = -f0 / n_max + (1.0 - kp) * std::log(big);
  const double small =
      std::max(std::exp(log_small), std::numeric_limits<double>::denorm_min());
  return {small, big};
}

void fill_iterate_bounds(FitResult& out, const CovarianceSet& data, const PenaltySpec& spec,
                         const PrecisionSet& start) {
  const auto [m, big] =
      iterate_bounds(start, data, spec, out.estimate.empty() ? start : out.estimate);
  out.bounds.iterate_lower = m;
  out.bounds.iterate_upper = big;
}

double offdiag_l1(const Matrix& m) {
  return m.cwiseAbs().sum() - m.diagonal().cwiseAbs().sum();
}

}  // namespace

FitResult fit_ista(const CovarianceSet& data, const PenaltySpec& spec, const SolverOptions& opts,
                   const std::optional<PrecisionSet>& t0) {
  validate_options(opts);
  if (!data.diagonals_positive()) {
    throw std::domain_error("fit requires strictly positive covariance diagonals");
  }
  const PrecisionSet start = starting_point(data, spec.lambda1, t0);
  PrecisionSet theta = start;
  double f_cur = *smooth_value(theta, data);
  double obj_cur = f_cur + penalty_value(theta, spec);

  FitResult out;
  SolverReport& rep = out.report;
  rep.objective_trace.push_back(obj_cur);
  rep.f_trace.push_back(f_cur);
  if (opts.track_spectral) rep.spectral_trace.push_back(spectral_max(theta));

  PrecisionSet theta_prev, grad_prev;
  for (int it = 1; it <= opts.max_iter; ++it) {
    PrecisionSet grad = jgl_gradient(theta, data);
    double eta_init = opts.eta0;
    if (it > 1 && opts.step_init == StepInit::barzilai_borwein) {
      eta_init = bb_step(theta_prev, theta, grad_prev, grad);
    } else if (it > 1 && opts.step_init == StepInit::safe) {
      eta_init = safe_step(theta);
    }
    BacktrackResult bt = backtrack_step_at(theta, f_cur, grad, data, spec, eta_init,
                                           opts.backtrack_c, opts.backtrack_cap);
    if (!bt.accepted) {
      rep.status = SolverStatus::numerical_failure;
      break;
    }
    rep.iterations = it;
    const double obj_next = bt.f_next + penalty_value(bt.next, spec);
    rep.objective_trace.push_back(obj_next);
    rep.f_trace.push_back(bt.f_next);
    rep.step_trace.push_back(bt.eta);
    rep.backtrack_counts.push_back(bt.tries);
    rep.quad_trace.push_back(bt.quad);
    if (opts.track_spectral) rep.spectral_trace.push_back(spectral_max(bt.next));
    rep.final_relative_error = relative_change(bt.next, theta);
    const bool stop = stopping(theta, bt.next, opts.stop_rule, obj_next, opts.f_star, opts.eps);
    theta_prev = std::move(theta);
    grad_prev = std::move(grad);
    theta = std::move(bt.next);
    f_cur = bt.f_next;
    obj_cur = obj_next;
    if (stop) {
      rep.status = SolverStatus::converged;
      break;
    }
  }
  rep.final_objective = obj_cur;
  out.estimate = std::move(theta);
  out.bounds = solution_bounds(data, spec);
  fill_iterate_bounds(out, data, spec, start);
  return out;
}

FitResult fit_mista(const CovarianceSet& data, const PenaltySpec& spec, const SolverOptions& opts,
                    const std::optional<PrecisionSet>& t0) {
  validate_options(opts);
  if (!data.diagonals_positive()) {
    throw std::domain_error("fit requires strictly positive covariance diagonals");
  }
  const PrecisionSet start = starting_point(data, spec.lambda1, t0);
  PrecisionSet theta = start;
  double obj_cur = jgl_objective(theta, data, spec).total;

  FitResult out;
  SolverReport& rep = out.report;
  rep.objective_trace.push_back(obj_cur);
  rep.f_trace.push_back(*smooth_value(theta, data));
  if (opts.track_spectral) rep.spectral_trace.push_back(spectral_max(theta));

  const std::size_t kc = theta.size();
  double curvature = opts.eta0;  // L_t, only ever halved
  std::vector<SymMatrix> inverses(kc);
  PrecisionSet grad(kc), shifted(kc), dir(kc);
  for (int it = 1; it <= opts.max_iter; ++it) {
    for (std::size_t k = 0; k < kc; ++k) {
      inverses[k] = invert_pd(SymMatrix(theta[k]));
      grad[k] = data.n[k] * (data.s[k].mat() - inverses[k].mat());
    }
    ScStep sc;
    int halvings = 0;
    bool fixed_point = false;
    bool failed = false;
    for (;;) {
      const double step = 1.0 / curvature;
      for (std::size_t k = 0; k < kc; ++k) shifted[k] = theta[k] - step * grad[k];
      PrecisionSet prox = prox_penalty(shifted, step, spec);
      for (std::size_t k = 0; k < kc; ++k) dir[k] = prox[k] - theta[k];
      sc = sc_step_with_inverses(dir, curvature, data, inverses);
      if (sc.converged) {
        fixed_point = true;
        break;
      }
      if (sc.alpha <= 1.0) break;
      curvature /= 2.0;
      if (++halvings > opts.halving_cap) {
        failed = true;
        break;
      }
    }
    if (fixed_point) {
      rep.status = SolverStatus::converged;
      rep.final_relative_error = 0.0;
      break;
    }
    if (failed) {
      rep.status = SolverStatus::numerical_failure;
      break;
    }
    PrecisionSet next(kc);
    for (std::size_t k = 0; k < kc; ++k) next[k] = theta[k] + sc.alpha * dir[k];
    const auto f_next = smooth_value(next, data);  // doubles as the PD check
    if (!f_next) {
      rep.status = SolverStatus::numerical_failure;
      break;
    }
    rep.iterations = it;
    const double obj_next = *f_next + penalty_value(next, spec);
    rep.objective_trace.push_back(obj_next);
    rep.f_trace.push_back(*f_next);
    rep.step_trace.push_back(sc.alpha);
    rep.backtrack_counts.push_back(halvings);
    if (opts.track_spectral) rep.spectral_trace.push_back(spectral_max(next));
    rep.final_relative_error = relative_change(next, theta);
    const bool stop = stopping(theta, next, opts.stop_rule, obj_next, opts.f_star, opts.eps);
    theta = std::move(next);
    obj_cur = obj_next;
    if (stop) {
      rep.status = SolverStatus::converged;
      break;
    }
  }
  rep.final_objective = obj_cur;
  out.estimate = std::move(theta);
  out.bounds = solution_bounds(data, spec);
  fill_iterate_bounds(out, data, spec, start);
  return out;
}

FitResult fit_gista(const SymMatrix& s, double lambda, const SolverOptions& opts,
                    const std::optional<Matrix>& t0) {
  validate_options(opts);
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const Eigen::Index p = s.dim();
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!(s(i, i) > 0.0)) throw std::domain_error("covariance diagonal must be positive");
  }

  Matrix theta;
  if (t0) {
    theta = *t0;
  } else {
    theta = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) theta(i, i) = 1.0 / (s(i, i) + lambda);
  }
  const Matrix start = theta;
  {
    const auto ld = cholesky_logdet(SymMatrix(theta));
    if (!ld.positive_definite) {
      throw std::invalid_argument("initial point must be positive definite");
    }
  }
  auto smooth = [&](const Matrix& t) -> std::optional<double> {
    const auto ld = cholesky_logdet(SymMatrix(t));
    if (!ld.positive_definite) return std::nullopt;
    return s.mat().cwiseProduct(t).sum() - ld.value;
  };
  double f_cur = *smooth(theta);
  double obj_cur = f_cur + lambda * offdiag_l1(theta);

  FitResult out;
  SolverReport& rep = out.report;
  rep.objective_trace.push_back(obj_cur);
  rep.f_trace.push_back(f_cur);
  if (opts.track_spectral) rep.spectral_trace.push_back(norms(SymMatrix(theta)).spectral);

  Matrix theta_prev, grad_prev;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const Matrix inv = invert_pd(SymMatrix(theta)).mat();
    const Matrix grad = s.mat() - inv;
    double eta = opts.eta0;
    if (it > 1 && opts.step_init == StepInit::barzilai_borwein) {
      const Matrix dt = theta - theta_prev;
      const double den = dt.cwiseProduct(grad - grad_prev).sum();
      if (den > 0.0) {
        eta = dt.squaredNorm() / den;
      } else {
        const double lmin = extreme_eigenvalues(SymMatrix(theta)).min;
        eta = lmin * lmin;
      }
      eta = std::max(eta, 1e-12);
    } else if (it > 1 && opts.step_init == StepInit::safe) {
      const double lmin = extreme_eigenvalues(SymMatrix(theta)).min;
      eta = lmin * lmin;
    }

    const double slack = 1e-12 * std::max(1.0, std::abs(f_cur));
    Matrix next;
    double f_next = 0.0, quad = 0.0;
    int tries = 0;
    bool accepted = false;
    auto attempt = [&](double step) {
      Matrix cand = theta - step * grad;
      for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
          if (i != j) cand(i, j) = soft_threshold(cand(i, j), step * lambda);
        }
      }
      const auto fc = smooth(cand);
      if (!fc) return false;
      const Matrix delta = cand - theta;
      const double q =
          f_cur + delta.cwiseProduct(grad).sum() + delta.squaredNorm() / (2.0 * step);
      if (*fc > q + slack) return false;
      next = std::move(cand);
      f_next = *fc;
      quad = q;
      accepted = true;
      return true;
    };
    double trial = eta;
    for (int t = 0; t <= opts.backtrack_cap && !attempt(trial); ++t) {
      ++tries;
      trial *= opts.backtrack_c;
    }
    if (!accepted) {
      const double lmin = extreme_eigenvalues(SymMatrix(theta)).min;
      trial = lmin * lmin;
      if (!attempt(trial)) {
        rep.status = SolverStatus::numerical_failure;
        break;
      }
    }

    rep.iterations = it;
    const double obj_next = f_next + lambda * offdiag_l1(next);
    rep.objective_trace.push_back(obj_next);
    rep.f_trace.push_back(f_next);
    rep.step_trace.push_back(trial);
    rep.backtrack_counts.push_back(tries);
    rep.quad_trace.push_back(quad);
    if (opts.track_spectral) rep.spectral_trace.push_back(norms(SymMatrix(next)).spectral);
    rep.final_relative_error = (next - theta).norm() / std::max(theta.norm(), 1.0);
    rep.duality_gap = duality_gap(next, s, lambda);

    theta_prev = std::move(theta);
    grad_prev = grad;
    theta = std::move(next);
    f_cur = f_next;
    obj_cur = obj_next;
    if (rep.duality_gap <= opts.eps) {
      rep.status = SolverStatus::converged;
      break;
    }
  }
  rep.final_objective = obj_cur;

  const CovarianceSet single({s}, {1});
  out.estimate.push_back(theta);
  out.bounds = solution_bounds_raw(single, lambda, 0.0);
  const double f0 = *smooth(start) + lambda * offdiag_l1(start);
  const auto [m, big] =
      iterate_corridor(f0, 1.0, static_cast<double>(p), start.norm(), theta.norm());
  out.bounds.iterate_lower = m;
  out.bounds.iterate_upper = big;
  return out;
}

double duality_gap(const Matrix& theta, const SymMatrix& s, double lambda) {
  const Eigen::Index p = theta.rows();
  const auto ld_theta = cholesky_logdet(SymMatrix(theta));
  if (!ld_theta.positive_definite) {
    throw std::domain_error("duality gap requires a positive definite iterate");
  }
  const Matrix inv = invert_pd(SymMatrix(theta)).mat();
  Matrix u = inv - s.mat();
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      // Dual feasibility: the box applies off-diagonal; the diagonal carries
      // no penalty, so its dual variable is identically zero.
      u(i, j) = i == j ? 0.0 : std::min(std::max(u(i, j), -lambda), lambda);
    }
  }
  const auto ld_dual = cholesky_logdet(SymMatrix(s.mat() + u));
  if (!ld_dual.positive_definite) return kInf;
  const double tr = s.mat().cwiseProduct(theta).sum();
  return -ld_dual.value - static_cast<double>(p) - ld_theta.value + tr +
         lambda * offdiag_l1(theta);
}

BoundDiagnostics solution_bounds(const CovarianceSet& data, const PenaltySpec& spec) {
  return solution_bounds_raw(data, spec.lambda1, spec.lambda2);
}

std::pair<double, double> iterate_bounds(const PrecisionSet& t0, const CovarianceSet& data,
                                         const PenaltySpec& spec, const PrecisionSet& t_star) {
  const double f0 = jgl_objective(t0, data, spec).total;
  int n_max = 0;
  for (int n : data.n) n_max = std::max(n_max, n);
  const double kp = static_cast<double>(data.classes()) * static_cast<double>(data.dim());
  return iterate_corridor(f0, static_cast<double>(n_max), kp, std::sqrt(frobenius_sq(t0)),
                          std::sqrt(frobenius_sq(t_star)));
}

}  // namespace jgl
