#include "jgl/bench_eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "jgl/rng.hpp"

namespace jgl {

namespace {

constexpr double kMargin = 0.1;

void validate_spec(const SyntheticSpec& spec) {
  if (spec.p < 2) throw std::invalid_argument("generate: p must be >= 2");
  if (spec.classes < 1) throw std::invalid_argument("generate: classes must be >= 1");
  if (spec.total_samples < spec.classes) {
    throw std::invalid_argument("generate: need at least one sample per class");
  }
  if (!spec.class_shares.empty()) {
    if (static_cast<int>(spec.class_shares.size()) != spec.classes) {
      throw std::invalid_argument("generate: class_shares size must match classes");
    }
    for (double s : spec.class_shares) {
      if (!(s > 0.0)) throw std::invalid_argument("generate: class shares must be positive");
    }
  }
  if (!(spec.edge_density > 0.0) || !(spec.edge_density < 1.0)) {
    throw std::invalid_argument("generate: edge_density must lie in (0, 1)");
  }
  if (spec.common_fraction < 0.0 || spec.common_fraction > 1.0) {
    throw std::invalid_argument("generate: common_fraction must lie in [0, 1]");
  }
  if (!(spec.signal_lo > 0.0) || !(spec.signal_hi >= spec.signal_lo)) {
    throw std::invalid_argument("generate: need 0 < signal_lo <= signal_hi");
  }
}

std::vector<int> apportion(int total, const std::vector<double>& shares, int classes) {
  std::vector<double> w(static_cast<std::size_t>(classes),
                        1.0 / static_cast<double>(classes));
  if (!shares.empty()) {
    double sum = 0.0;
    for (double s : shares) sum += s;
    for (int k = 0; k < classes; ++k) w[static_cast<std::size_t>(k)] = shares[static_cast<std::size_t>(k)] / sum;
  }
  // Cumulative rounding: sizes sum to total exactly and are seed-independent.
  std::vector<int> n(static_cast<std::size_t>(classes));
  double cum = 0.0;
  int prev = 0;
  for (int k = 0; k < classes; ++k) {
    cum += w[static_cast<std::size_t>(k)];
    const int next = static_cast<int>(std::llround(cum * total));
    n[static_cast<std::size_t>(k)] = next - prev;
    prev = next;
  }
  for (int k = 0; k < classes; ++k) {
    if (n[static_cast<std::size_t>(k)] < 1) {
      throw std::invalid_argument("generate: class " + std::to_string(k) +
                                  " receives no samples under the given shares");
    }
  }
  return n;
}

}  // namespace

GroundTruth generate(const SyntheticSpec& spec) {
  validate_spec(spec);
  const int p = spec.p;
  const int kk = spec.classes;
  DeterministicRng rng(spec.seed);

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(p) * static_cast<std::size_t>(p - 1) / 2);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) pairs.emplace_back(i, j);
  }
  const std::size_t total_pairs = pairs.size();
  const std::size_t per_class =
      static_cast<std::size_t>(std::llround(spec.edge_density * static_cast<double>(total_pairs)));
  const std::size_t common =
      static_cast<std::size_t>(std::llround(spec.common_fraction * static_cast<double>(per_class)));

  const auto draw_value = [&]() {
    const double mag = rng.uniform(spec.signal_lo, spec.signal_hi);
    return rng.below(2) == 0 ? mag : -mag;
  };

  // Common support and shared magnitudes first, in one fixed draw order.
  std::vector<std::size_t> perm = rng.permutation(total_pairs);
  std::vector<std::size_t> common_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(common));
  std::sort(common_idx.begin(), common_idx.end());
  std::vector<double> common_val(common);
  for (double& v : common_val) v = draw_value();

  std::vector<char> is_common(total_pairs, 0);
  for (std::size_t e : common_idx) is_common[e] = 1;
  std::vector<std::size_t> rest;
  rest.reserve(total_pairs - common);
  for (std::size_t e = 0; e < total_pairs; ++e) {
    if (!is_common[e]) rest.push_back(e);
  }

  GroundTruth truth;
  for (int k = 0; k < kk; ++k) {
    Matrix a = Matrix::Zero(p, p);
    for (std::size_t c = 0; c < common; ++c) {
      const auto [i, j] = pairs[common_idx[c]];
      a(i, j) = a(j, i) = common_val[c];
    }
    const std::size_t privates = per_class - common;
    const std::vector<std::size_t> sub = rng.permutation(rest.size());
    std::vector<std::size_t> chosen(privates);
    for (std::size_t c = 0; c < privates; ++c) chosen[c] = rest[sub[c]];
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t e : chosen) {
      const auto [i, j] = pairs[e];
      a(i, j) = a(j, i) = draw_value();
    }

    // Diagonal shift to an exact eigenvalue margin; Gershgorin is the
    // fallback if the eigensolve result does not actually clear it.
    double shift = std::abs(std::min(0.0, extreme_eigenvalues(SymMatrix(a)).min)) + kMargin;
    Matrix theta = a + shift * Matrix::Identity(p, p);
    if (extreme_eigenvalues(SymMatrix(theta)).min < kMargin - 1e-9) {
      shift = a.cwiseAbs().rowwise().sum().maxCoeff() + kMargin;
      theta = a + shift * Matrix::Identity(p, p);
    }

    // Rescale so the implied covariance has unit diagonal.
    const SymMatrix sigma = invert_pd(SymMatrix(theta));
    Eigen::VectorXd scale(p);
    for (int j = 0; j < p; ++j) scale(j) = std::sqrt(sigma(j, j));
    theta = scale.asDiagonal() * theta * scale.asDiagonal();
    const SymMatrix final_theta((theta + theta.transpose()) / 2.0);
    if (extreme_eigenvalues(final_theta).min < kMargin - 1e-9) {
      throw std::invalid_argument(
          "generate: infeasible spec, the unit-diagonal rescale leaves the precision matrix "
          "below the 0.1 eigenvalue margin; lower edge_density or the signal range");
    }

    EdgeList edges;
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) {
        if (final_theta(i, j) != 0.0) edges.emplace_back(i, j);
      }
    }
    truth.true_theta.push_back(final_theta.mat());
    truth.true_edges.push_back(std::move(edges));
  }

  const std::vector<int> counts = apportion(spec.total_samples, spec.class_shares, kk);
  for (int k = 0; k < kk; ++k) {
    const SymMatrix cov = invert_pd(SymMatrix(truth.true_theta[static_cast<std::size_t>(k)]));
    const auto chol = cholesky_factor(cov);
    if (!chol) throw std::runtime_error("generate: covariance factorization failed");
    const int n = counts[static_cast<std::size_t>(k)];
    Matrix x(n, p);
    Eigen::VectorXd z(p);
    for (int r = 0; r < n; ++r) {
      for (int j = 0; j < p; ++j) z(j) = rng.normal();
      x.row(r) = (*chol * z).transpose();
    }
    truth.samples.samples.push_back(std::move(x));
  }
  return truth;
}

RocCounts roc_counts(const GroundTruth& truth, const PrecisionSet& estimate, double threshold) {
  if (estimate.size() != truth.true_theta.size()) {
    throw std::invalid_argument("roc_counts: class count mismatch");
  }
  RocCounts out;
  for (std::size_t k = 0; k < estimate.size(); ++k) {
    const Matrix& t = truth.true_theta[k];
    const Matrix& e = estimate[k];
    if (e.rows() != t.rows() || e.cols() != t.cols()) {
      throw std::invalid_argument("roc_counts: dimension mismatch");
    }
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < t.cols(); ++j) {
        const bool real = t(i, j) != 0.0;
        const bool selected = std::abs(e(i, j)) > threshold;
        if (real && selected) ++out.tp;
        if (!real && selected) ++out.fp;
        if (real && !selected) ++out.fn;
        if (!real && !selected) ++out.tn;
      }
    }
  }
  return out;
}

std::vector<std::pair<long, long>> roc_curve(const GroundTruth& truth,
                                             const std::vector<PrecisionSet>& fits) {
  std::vector<std::pair<long, long>> out;
  out.reserve(fits.size());
  for (const PrecisionSet& fit : fits) {
    const RocCounts c = roc_counts(truth, fit, 0.0);
    out.emplace_back(c.fp, c.tp);
  }
  return out;
}

double mse(const GroundTruth& truth, const PrecisionSet& estimate) {
  if (estimate.size() != truth.true_theta.size()) {
    throw std::invalid_argument("mse: class count mismatch");
  }
  const double p = static_cast<double>(truth.true_theta.front().rows());
  const double kk = static_cast<double>(truth.true_theta.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < estimate.size(); ++k) {
    const Matrix& t = truth.true_theta[k];
    const Matrix& e = estimate[k];
    if (e.rows() != t.rows() || e.cols() != t.cols()) {
      throw std::invalid_argument("mse: dimension mismatch");
    }
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < t.cols(); ++j) {
        const double d = e(i, j) - t(i, j);
        sum += d * d;
      }
    }
  }
  return 2.0 / (kk * p * (p - 1.0)) * sum;
}

std::vector<std::pair<int, double>> convergence_trace(const SolverReport& report, double f_star) {
  std::vector<std::pair<int, double>> out;
  for (std::size_t t = 0; t < report.objective_trace.size(); ++t) {
    const double gap = report.objective_trace[t] - f_star;
    if (gap < -1e-12) {
      throw std::invalid_argument("convergence_trace: f_star exceeds a trace value");
    }
    if (gap > 1e-12) out.emplace_back(static_cast<int>(t), std::log10(gap));
  }
  return out;
}

}  // namespace jgl
