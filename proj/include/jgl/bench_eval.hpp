#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "jgl/matrix_core.hpp"
#include "jgl/solver_core.hpp"

namespace jgl {

struct SyntheticSpec {
  int p = 50;
  int classes = 2;
  int total_samples = 600;
  std::vector<double> class_shares;  // empty = equal split; normalized otherwise
  double edge_density = 0.05;
  double common_fraction = 0.8;
  double signal_lo = 0.1;  // off-diagonal magnitudes drawn uniform in +-[lo, hi]
  double signal_hi = 0.3;
  std::uint64_t seed = 0;
};

/// Off-diagonal support, (i, j) with i < j, 0-based, sorted.
using EdgeList = std::vector<std::pair<int, int>>;

struct GroundTruth {
  PrecisionSet true_theta;
  std::vector<EdgeList> true_edges;
  ClassDataset samples;
};

/// Common Erdos-Renyi support shared by every class plus per-class private
/// edges, diagonal shifted to a 0.1 eigenvalue margin, then rescaled so the
/// covariance has unit diagonal. Throws when the rescale eats the margin
/// (density/signal too high) or the spec is malformed. Deterministic in seed.
GroundTruth generate(const SyntheticSpec& spec);

struct RocCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long tn = 0;
};

/// Edge (i, j, k) is selected iff |theta_hat| > threshold and true iff the
/// generating theta is nonzero; tp+fp+fn+tn == K p (p-1) / 2.
RocCounts roc_counts(const GroundTruth& truth, const PrecisionSet& estimate,
                     double threshold = 0.0);

/// (FP, TP) per fit along a lambda1 ladder (callers order fits by decreasing
/// lambda1), threshold 0.
std::vector<std::pair<long, long>> roc_curve(const GroundTruth& truth,
                                             const std::vector<PrecisionSet>& fits);

/// 2 / (K p (p-1)) * sum_k sum_{i<j} (theta_hat - theta)^2.
double mse(const GroundTruth& truth, const PrecisionSet& estimate);

/// (t, log10(F(Theta_t) - f_star)) pairs; entries with gap <= 1e-12 are
/// dropped, a gap below -1e-12 means f_star is not a valid reference and
/// throws.
std::vector<std::pair<int, double>> convergence_trace(const SolverReport& report, double f_star);

}  // namespace jgl
