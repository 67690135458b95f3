#include "jgl/solver_core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace jgl {

namespace {

void check_shapes(const PrecisionSet& theta, const CovarianceSet& data) {
  if (theta.size() != static_cast<std::size_t>(data.classes())) {
    throw std::invalid_argument("class count mismatch between iterate and data");
  }
  for (const Matrix& t : theta) {
    if (t.rows() != data.dim() || t.cols() != data.dim()) {
      throw std::invalid_argument("iterate dimension mismatch");
    }
  }
}

double offdiag_abs_sum(const Matrix& m) {
  return m.cwiseAbs().sum() - m.diagonal().cwiseAbs().sum();
}

}  // namespace

double frobenius_sq(const PrecisionSet& a) {
  double s = 0.0;
  for (const Matrix& m : a) s += m.squaredNorm();
  return s;
}

double inner_product(const PrecisionSet& a, const PrecisionSet& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

double relative_change(const PrecisionSet& next, const PrecisionSet& prev) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < prev.size(); ++k) {
    num += (next[k] - prev[k]).norm();
    den += prev[k].norm();
  }
  return num / std::max(den, 1.0);
}

std::optional<double> smooth_value(const PrecisionSet& theta, const CovarianceSet& data) {
  check_shapes(theta, data);
  double f = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const auto ld = cholesky_logdet(SymMatrix(theta[k]));
    if (!ld.positive_definite) return std::nullopt;
    const double tr = data.s[k].mat().cwiseProduct(theta[k]).sum();
    f += data.n[k] * (tr - ld.value);
  }
  return f;
}

double penalty_value(const PrecisionSet& theta, const PenaltySpec& spec) {
  double l1 = 0.0;
  for (const Matrix& t : theta) l1 += offdiag_abs_sum(t);
  double coupling = 0.0;
  if (spec.kind == PenaltyKind::fused) {
    // Ordered class pairs: each unordered pair contributes twice. Diagonal
    // entries are fused even though the l1 part skips them.
    for (std::size_t k = 0; k < theta.size(); ++k) {
      for (std::size_t l = k + 1; l < theta.size(); ++l) {
        coupling += 2.0 * (theta[k] - theta[l]).cwiseAbs().sum();
      }
    }
  } else {
    const Eigen::Index p = theta.front().rows();
    Matrix sq = Matrix::Zero(p, p);
    for (const Matrix& t : theta) sq += t.cwiseProduct(t);
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        if (i != j) coupling += std::sqrt(sq(i, j));
      }
    }
  }
  return spec.lambda1 * l1 + spec.lambda2 * coupling;
}

ObjectiveValue jgl_objective(const PrecisionSet& theta, const CovarianceSet& data,
                             const PenaltySpec& spec) {
  const auto f = smooth_value(theta, data);
  if (!f) throw std::domain_error("objective requires positive definite blocks");
  ObjectiveValue v;
  v.smooth = *f;
  v.penalty = penalty_value(theta, spec);
  v.total = v.smooth + v.penalty;
  return v;
}

PrecisionSet jgl_gradient(const PrecisionSet& theta, const CovarianceSet& data) {
  check_shapes(theta, data);
  PrecisionSet grad(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const SymMatrix inv = invert_pd(SymMatrix(theta[k]));
    grad[k] = data.n[k] * (data.s[k].mat() - inv.mat());
  }
  return grad;
}

double quadratic_model_at(const PrecisionSet& next, const PrecisionSet& cur, double f_cur,
                          const PrecisionSet& grad, double eta) {
  double linear = 0.0;
  double dist_sq = 0.0;
  for (std::size_t k = 0; k < cur.size(); ++k) {
    const Matrix delta = next[k] - cur[k];
    linear += delta.cwiseProduct(grad[k]).sum();
    dist_sq += delta.squaredNorm();
  }
  return f_cur + linear + dist_sq / (2.0 * eta);
}

double quadratic_model(const PrecisionSet& next, const PrecisionSet& cur,
                       const CovarianceSet& data, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("quadratic model requires eta > 0");
  const auto f = smooth_value(cur, data);
  if (!f) throw std::domain_error("quadratic model requires a PD expansion point");
  return quadratic_model_at(next, cur, *f, jgl_gradient(cur, data), eta);
}

double safe_step(const PrecisionSet& theta) {
  double step = std::numeric_limits<double>::infinity();
  for (const Matrix& t : theta) {
    const double lmin = extreme_eigenvalues(SymMatrix(t)).min;
    step = std::min(step, lmin * lmin);
  }
  return step;
}

double bb_step(const PrecisionSet& prev, const PrecisionSet& cur, const PrecisionSet& grad_prev,
               const PrecisionSet& grad_cur) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < cur.size(); ++k) {
    const Matrix dt = cur[k] - prev[k];
    num += dt.squaredNorm();
    den += dt.cwiseProduct(grad_cur[k] - grad_prev[k]).sum();
  }
  const double step = den > 0.0 ? num / den : safe_step(cur);
  return std::max(step, 1e-12);
}

BacktrackResult backtrack_step(const PrecisionSet& cur, const CovarianceSet& data,
                               const PenaltySpec& spec, double eta0, double c, int cap) {
  const auto f_cur = smooth_value(cur, data);
  if (!f_cur) throw std::domain_error("backtracking from a non-PD iterate");
  return backtrack_step_at(cur, *f_cur, jgl_gradient(cur, data), data, spec, eta0, c, cap);
}

BacktrackResult backtrack_step_at(const PrecisionSet& cur, double f_cur, const PrecisionSet& grad,
                                  const CovarianceSet& data, const PenaltySpec& spec, double eta0,
                                  double c, int cap) {
  if (!(eta0 > 0.0) || !(c > 0.0) || !(c < 1.0)) {
    throw std::invalid_argument("backtracking needs eta0 > 0 and c in (0,1)");
  }
  const double slack = 1e-12 * std::max(1.0, std::abs(f_cur));

  PrecisionSet shifted(cur.size());
  BacktrackResult res;
  auto attempt = [&](double eta) {
    for (std::size_t k = 0; k < cur.size(); ++k) shifted[k] = cur[k] - eta * grad[k];
    PrecisionSet cand = prox_penalty(shifted, eta, spec);
    const auto f_cand = smooth_value(cand, data);
    if (!f_cand) return false;
    const double q = quadratic_model_at(cand, cur, f_cur, grad, eta);
    if (*f_cand > q + slack) return false;
    res.next = std::move(cand);
    res.eta = eta;
    res.accepted = true;
    res.f_next = *f_cand;
    res.quad = q;
    return true;
  };

  double eta = eta0;
  for (int t = 0; t <= cap; ++t) {
    if (attempt(eta)) return res;
    ++res.tries;
    eta *= c;
  }
  // Last resort before declaring failure: the provably admissible step.
  if (attempt(safe_step(cur))) return res;
  ++res.tries;
  return res;
}

ScStep sc_step_with_inverses(const PrecisionSet& d, double L, const CovarianceSet& data,
                             const std::vector<SymMatrix>& inverses) {
  ScStep s;
  s.beta = L * frobenius_sq(d);
  if (s.beta <= 0.0) {
    s.converged = true;
    return s;
  }
  for (std::size_t k = 0; k < d.size(); ++k) {
    s.lambda += data.n[k] * (inverses[k].mat() * d[k]).norm();
  }
  if (s.lambda <= 0.0) {
    s.converged = true;
    return s;
  }
  s.alpha = s.beta / (s.lambda * (s.lambda + s.beta));
  return s;
}

ScStep sc_step(const PrecisionSet& theta, const PrecisionSet& d, double L,
               const CovarianceSet& data) {
  if (!(L > 0.0)) throw std::invalid_argument("sc_step requires L > 0");
  check_shapes(theta, data);
  std::vector<SymMatrix> inverses;
  inverses.reserve(theta.size());
  for (const Matrix& t : theta) inverses.push_back(invert_pd(SymMatrix(t)));
  return sc_step_with_inverses(d, L, data, inverses);
}

bool stopping(const PrecisionSet& prev, const PrecisionSet& cur, StopRule rule, double f_cur,
              std::optional<double> f_star, double eps) {
  if (rule == StopRule::relative_error) {
    return relative_change(cur, prev) <= eps;
  }
  if (!f_star) {
    throw std::invalid_argument("objective_error stopping needs a reference optimum");
  }
  return std::abs(f_cur - *f_star) <= eps;
}

PrecisionSet default_initial_point(const CovarianceSet& data, double lambda1) {
  PrecisionSet theta(data.classes());
  const Eigen::Index p = data.dim();
  for (int k = 0; k < data.classes(); ++k) {
    theta[k] = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
      theta[k](i, i) = 1.0 / (data.s[k].mat()(i, i) + lambda1);
    }
  }
  return theta;
}

}  // namespace jgl
