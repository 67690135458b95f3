#pragma once

#include "jgl/matrix_core.hpp"

#include <vector>

namespace jgl {

enum class PenaltyKind { fused, group };

/// Sparsity weight lambda1, coupling weight lambda2, and which coupling
/// penalty applies across the K classes.
struct PenaltySpec {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  PenaltyKind kind = PenaltyKind::fused;

  PenaltySpec(double l1, double l2, PenaltyKind k);
};

/// sgn(x) * max(|x| - lambda, 0).
double soft_threshold(double x, double lambda);

/// Exact minimizer of
///   1/2 sum_i (theta_i - y_i)^2 + sum_i w_i |theta_{i+1} - theta_i|
/// over a chain, by forward clipping of the piecewise-linear derivative and
/// a backward pass over the stored clip windows.
std::vector<double> flsa_chain(const std::vector<double>& y, const std::vector<double>& w);

/// Exact minimizer of the K-point all-pairs fused problem
///   1/2 sum_k (theta_k - a_k)^2 + alpha1 sum_k |theta_k|
///     + alpha2 sum_{k != l} |theta_k - theta_l|.
/// The sum over k != l counts ordered pairs, so each unordered pair carries
/// weight 2*alpha2. Solved with alpha1 = 0 first (sorted order reduces the
/// all-pairs penalty to a weighted chain with gap weights 2*alpha2*i*(K-i)),
/// then soft-thresholded coordinatewise by alpha1.
std::vector<double> flsa_group(const std::vector<double>& a, double alpha1, double alpha2);

/// Exact minimizer of
///   1/2 sum_k (theta_k - a_k)^2 + alpha1 sum_k |theta_k|
///     + alpha2 sqrt(sum_k theta_k^2),
/// via soft-threshold followed by the group shrinkage factor.
std::vector<double> group_shrink(const std::vector<double>& a, double alpha1, double alpha2);

/// Entrywise prox of eta * (lambda1 l1-offdiag + coupling penalty) applied to
/// K stacked symmetric matrices. Groups (i, j) are independent; each result is
/// written to both triangles so outputs stay exactly symmetric. Under the
/// fused penalty the diagonal keeps alpha1 = 0 but is still fused; under the
/// group penalty diagonal entries pass through unchanged.
std::vector<Matrix> prox_penalty(const std::vector<Matrix>& a, double eta,
                                 const PenaltySpec& spec);

}  // namespace jgl
