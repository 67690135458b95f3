#include "jgl/prox_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace jgl {

namespace {

/// Piecewise-linear nondecreasing derivative of the running chain message.
/// Segment j is valid on (knot[j-1], knot[j]) with open ends at +-inf and has
/// value slope[j] * t + icept[j]; adjacent segments agree at the shared knot.
struct DerivState {
  std::vector<double> knot;
  std::vector<double> slope;
  std::vector<double> icept;
  std::vector<double> knot2, slope2, icept2;  // rebuild scratch

  void reset(double y0) {
    knot.clear();
    slope.assign(1, 1.0);
    icept.assign(1, -y0);
  }

  // Leftmost t with value(t) == v. Requires all slopes >= 1 so the crossing
  // exists and is unique. Also reports the segment containing it.
  std::pair<double, std::size_t> solve(double v) const {
    const std::size_t m = slope.size();
    for (std::size_t j = 0; j + 1 < m; ++j) {
      if (slope[j] * knot[j] + icept[j] >= v) {
        return {(v - icept[j]) / slope[j], j};
      }
    }
    return {(v - icept[m - 1]) / slope[m - 1], m - 1};
  }

  // Replace the function by its truncation to [-w, w]: constant -w left of
  // lo, constant +w right of hi, unchanged in between. lo/hi and their
  // segment indices must come from solve(-w) / solve(+w).
  void clip(double lo, std::size_t jlo, double hi, std::size_t jhi, double w) {
    knot2.clear();
    slope2.clear();
    icept2.clear();
    slope2.push_back(0.0);
    icept2.push_back(-w);
    knot2.push_back(lo);
    for (std::size_t j = jlo; j <= jhi; ++j) {
      slope2.push_back(slope[j]);
      icept2.push_back(icept[j]);
      if (j < jhi) knot2.push_back(std::min(std::max(knot[j], lo), hi));
    }
    knot2.push_back(std::max(hi, lo));
    slope2.push_back(0.0);
    icept2.push_back(w);
    knot.swap(knot2);
    slope.swap(slope2);
    icept.swap(icept2);
  }

  void add_quadratic(double y) {
    for (std::size_t j = 0; j < slope.size(); ++j) {
      slope[j] += 1.0;
      icept[j] -= y;
    }
  }
};

struct ChainWorkspace {
  DerivState deriv;
  std::vector<double> lo, hi;
};

void solve_chain(const std::vector<double>& y, const std::vector<double>& w,
                 std::vector<double>& out) {
  const std::size_t n = y.size();
  out.resize(n);
  if (n == 1) {
    out[0] = y[0];
    return;
  }
  thread_local ChainWorkspace ws;
  ws.lo.resize(n - 1);
  ws.hi.resize(n - 1);
  ws.deriv.reset(y[0]);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto [lo, jlo] = ws.deriv.solve(-w[i]);
    const auto [hi, jhi] = ws.deriv.solve(w[i]);
    ws.lo[i] = lo;
    ws.hi[i] = hi;
    ws.deriv.clip(lo, jlo, hi, jhi, w[i]);
    ws.deriv.add_quadratic(y[i + 1]);
  }
  out[n - 1] = ws.deriv.solve(0.0).first;
  for (std::size_t i = n - 1; i-- > 0;) {
    out[i] = std::min(std::max(out[i + 1], ws.lo[i]), ws.hi[i]);
  }
}

void check_weights(double alpha1, double alpha2) {
  if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0)) {
    throw std::invalid_argument("prox weights must be nonnegative");
  }
}

void flsa_group_into(const std::vector<double>& a, double alpha1, double alpha2,
                     std::vector<double>& out) {
  const std::size_t k = a.size();
  if (k == 2) {
    // Single unordered pair, total fusion weight 2 * alpha2.
    double t0 = a[0], t1 = a[1];
    const double w = 2.0 * alpha2;
    if (std::abs(t0 - t1) <= 2.0 * w) {
      t0 = t1 = 0.5 * (a[0] + a[1]);
    } else if (t0 > t1) {
      t0 -= w;
      t1 += w;
    } else {
      t0 += w;
      t1 -= w;
    }
    out.resize(2);
    out[0] = soft_threshold(t0, alpha1);
    out[1] = soft_threshold(t1, alpha1);
    return;
  }

  thread_local std::vector<std::size_t> order;
  thread_local std::vector<double> ys, ws, chain;
  order.resize(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return a[l] < a[r]; });
  ys.resize(k);
  for (std::size_t i = 0; i < k; ++i) ys[i] = a[order[i]];
  // In sorted order the all-pairs penalty telescopes: the gap after position
  // i separates i+1 points from k-i-1, each ordered pair crossing it once.
  ws.resize(k - 1);
  for (std::size_t i = 0; i + 1 < k; ++i) {
    ws[i] = 2.0 * alpha2 * static_cast<double>(i + 1) * static_cast<double>(k - i - 1);
  }
  solve_chain(ys, ws, chain);
  out.resize(k);
  for (std::size_t i = 0; i < k; ++i) out[order[i]] = soft_threshold(chain[i], alpha1);
}

void group_shrink_into(const std::vector<double>& a, double alpha1, double alpha2,
                       std::vector<double>& out) {
  const std::size_t k = a.size();
  out.resize(k);
  double sq = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    out[i] = soft_threshold(a[i], alpha1);
    sq += out[i] * out[i];
  }
  const double nrm = std::sqrt(sq);
  const double factor = nrm > alpha2 ? 1.0 - alpha2 / nrm : 0.0;
  for (double& v : out) v *= factor;
}

}  // namespace

PenaltySpec::PenaltySpec(double l1, double l2, PenaltyKind k)
    : lambda1(l1), lambda2(l2), kind(k) {
  if (!(l1 > 0.0) || !(l2 > 0.0)) {
    throw std::invalid_argument("penalty weights must be positive");
  }
}

double soft_threshold(double x, double lambda) {
  if (x > lambda) return x - lambda;
  if (x < -lambda) return x + lambda;
  return 0.0;
}

std::vector<double> flsa_chain(const std::vector<double>& y, const std::vector<double>& w) {
  if (y.empty() || w.size() + 1 != y.size()) {
    throw std::invalid_argument("flsa_chain: need n points and n-1 weights");
  }
  for (double wi : w) {
    if (!(wi >= 0.0)) throw std::invalid_argument("flsa_chain: negative weight");
  }
  std::vector<double> out;
  solve_chain(y, w, out);
  return out;
}

std::vector<double> flsa_group(const std::vector<double>& a, double alpha1, double alpha2) {
  if (a.empty()) throw std::invalid_argument("flsa_group: empty input");
  check_weights(alpha1, alpha2);
  std::vector<double> out;
  if (a.size() == 1) {
    out.assign(1, soft_threshold(a[0], alpha1));
  } else {
    flsa_group_into(a, alpha1, alpha2, out);
  }
  return out;
}

std::vector<double> group_shrink(const std::vector<double>& a, double alpha1, double alpha2) {
  if (a.empty()) throw std::invalid_argument("group_shrink: empty input");
  check_weights(alpha1, alpha2);
  std::vector<double> out;
  group_shrink_into(a, alpha1, alpha2, out);
  return out;
}

std::vector<Matrix> prox_penalty(const std::vector<Matrix>& a, double eta,
                                 const PenaltySpec& spec) {
  if (a.empty()) throw std::invalid_argument("prox_penalty: no classes");
  const Eigen::Index p = a.front().rows();
  for (const Matrix& m : a) {
    if (m.rows() != p || m.cols() != p) {
      throw std::invalid_argument("prox_penalty: class dimensions differ");
    }
  }
  if (!(eta > 0.0)) throw std::invalid_argument("prox_penalty: step must be positive");

  const std::size_t k = a.size();
  const double a1 = eta * spec.lambda1;
  const double a2 = eta * spec.lambda2;
  std::vector<Matrix> out(k, Matrix(p, p));
  std::vector<double> vals(k), res(k);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = i; j < p; ++j) {
      for (std::size_t c = 0; c < k; ++c) vals[c] = a[c](i, j);
      if (spec.kind == PenaltyKind::fused) {
        // The l1 part skips the diagonal; the fusion part does not.
        flsa_group_into(vals, i == j ? 0.0 : a1, a2, res);
      } else if (i == j) {
        res = vals;
      } else {
        group_shrink_into(vals, a1, a2, res);
      }
      for (std::size_t c = 0; c < k; ++c) {
        out[c](i, j) = res[c];
        out[c](j, i) = res[c];
      }
    }
  }
  return out;
}

}  // namespace jgl
