#include "jgl/model_selection.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "jgl/rng.hpp"

namespace jgl {

namespace {

Matrix select_rows(const Matrix& x, const std::vector<int>& fold, int target, bool keep) {
  Eigen::Index count = 0;
  for (int f : fold) count += (f == target) == keep;
  Matrix out(count, x.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if ((fold[static_cast<std::size_t>(i)] == target) == keep) out.row(r++) = x.row(i);
  }
  return out;
}

CovarianceSet training_covariances(const ClassDataset& data, const FoldAssignments& folds,
                                   int fold, bool center) {
  std::vector<SymMatrix> mats;
  std::vector<int> counts;
  for (int k = 0; k < data.classes(); ++k) {
    Matrix train = select_rows(data.samples[static_cast<std::size_t>(k)],
                               folds[static_cast<std::size_t>(k)], fold, false);
    if (center) train = center_columns(train);
    counts.push_back(static_cast<int>(train.rows()));
    mats.push_back(empirical_covariance(train));
  }
  return CovarianceSet(std::move(mats), std::move(counts));
}

void validate_plan(const ClassDataset& data, const CvPlan& plan) {
  if (data.classes() == 0) throw std::invalid_argument("cross_validate: empty dataset");
  if (plan.grid.empty()) throw std::invalid_argument("cross_validate: empty grid");
  for (const auto& [l1, l2] : plan.grid) {
    if (!(l1 > 0.0) || !(l2 > 0.0)) {
      throw std::invalid_argument("cross_validate: grid pairs must be strictly positive");
    }
  }
  if (plan.algorithm == Algorithm::gista) {
    throw std::invalid_argument("cross_validate: gista has no (lambda1, lambda2) grid");
  }
  if (plan.jobs < 1) throw std::invalid_argument("cross_validate: jobs must be >= 1");
}

}  // namespace

FoldAssignments make_folds(const ClassDataset& data, int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("make_folds: need at least 2 folds");
  DeterministicRng rng(seed);
  FoldAssignments out;
  for (int k = 0; k < data.classes(); ++k) {
    const std::size_t n = static_cast<std::size_t>(data.samples[static_cast<std::size_t>(k)].rows());
    if (static_cast<std::size_t>(folds) > n) {
      throw std::invalid_argument("make_folds: class " + std::to_string(k) + " has " +
                                  std::to_string(n) + " samples, fewer than " +
                                  std::to_string(folds) + " folds");
    }
    const std::vector<std::size_t> order = rng.permutation(n);
    std::vector<int> assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      assign[order[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }
    out.push_back(std::move(assign));
  }
  return out;
}

double cv_fold_score(const ClassDataset& data, const FoldAssignments& folds, int fold,
                     const PrecisionSet& estimate, bool center) {
  double score = 0.0;
  for (int k = 0; k < data.classes(); ++k) {
    const Matrix& full = data.samples[static_cast<std::size_t>(k)];
    Matrix test = select_rows(full, folds[static_cast<std::size_t>(k)], fold, true);
    if (center) test = center_columns(test);
    const SymMatrix sd = empirical_covariance(test);
    const Matrix& theta = estimate[static_cast<std::size_t>(k)];
    const LogDetResult ld = cholesky_logdet(SymMatrix(theta));
    if (!ld.positive_definite) return std::numeric_limits<double>::infinity();
    const double nk = static_cast<double>(full.rows());
    score += nk * sd.mat().cwiseProduct(theta).sum() - ld.value;
  }
  // Corrupt inputs (NaN samples) can poison the trace term even when the fit
  // itself trained on clean folds; a non-finite score is a failed evaluation.
  return std::isfinite(score) ? score : std::numeric_limits<double>::infinity();
}

CvResult cross_validate(const ClassDataset& data, const CvPlan& plan, const SolverOptions& opts) {
  validate_plan(data, plan);
  const FoldAssignments folds = make_folds(data, plan.folds, plan.seed);

  // Training covariances are shared across grid points, so build them once.
  std::vector<CovarianceSet> train;
  train.reserve(static_cast<std::size_t>(plan.folds));
  for (int d = 0; d < plan.folds; ++d) {
    train.push_back(training_covariances(data, folds, d, plan.center));
  }

  const std::size_t points = plan.grid.size();
  const std::size_t tasks = points * static_cast<std::size_t>(plan.folds);
  std::vector<double> parts(tasks, std::numeric_limits<double>::infinity());
  std::atomic<std::size_t> cursor{0};

  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= tasks) return;
      const std::size_t g = i / static_cast<std::size_t>(plan.folds);
      const int d = static_cast<int>(i % static_cast<std::size_t>(plan.folds));
      const auto [l1, l2] = plan.grid[g];
      try {
        const PenaltySpec spec(l1, l2, plan.kind);
        const FitResult fit = plan.algorithm == Algorithm::mista
                                  ? fit_mista(train[static_cast<std::size_t>(d)], spec, opts)
                                  : fit_ista(train[static_cast<std::size_t>(d)], spec, opts);
        if (fit.report.status == SolverStatus::numerical_failure) continue;
        parts[i] = cv_fold_score(data, folds, d, fit.estimate, plan.center);
      } catch (const std::exception&) {
        // Failed fits keep the +inf slot: recorded, not fatal.
      }
    }
  };

  const std::size_t threads =
      std::min<std::size_t>(static_cast<std::size_t>(plan.jobs), tasks);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  CvResult result;
  result.fold_assignments = folds;
  result.scores.assign(points, 0.0);
  for (std::size_t g = 0; g < points; ++g) {
    double sum = 0.0;
    for (int d = 0; d < plan.folds; ++d) {
      sum += parts[g * static_cast<std::size_t>(plan.folds) + static_cast<std::size_t>(d)];
    }
    result.scores[g] = sum;
  }

  result.best_index = 0;
  for (std::size_t g = 1; g < points; ++g) {
    const double s = result.scores[g];
    const double b = result.scores[result.best_index];
    const auto& [gl1, gl2] = plan.grid[g];
    const auto& [bl1, bl2] = plan.grid[result.best_index];
    if (s < b || (s == b && (gl1 < bl1 || (gl1 == bl1 && gl2 < bl2)))) result.best_index = g;
  }
  result.best = plan.grid[result.best_index];
  return result;
}

std::vector<double> parse_grid_axis(const std::string& text, const std::string& what) {
  std::vector<double> values;
  if (text.rfind("log:", 0) == 0) {
    int count = 0;
    double lo = 0.0, hi = 0.0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "log:%d:%lf:%lf%c", &count, &lo, &hi, &tail) != 3 ||
        count < 1 || !(lo > 0.0) || !(hi >= lo)) {
      throw std::invalid_argument(what + ": expected log:COUNT:MIN:MAX with 0 < MIN <= MAX");
    }
    for (int i = 0; i < count; ++i) {
      const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      values.push_back(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))));
    }
    return values;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = std::min(text.find(',', pos), text.size());
    const std::string cell = text.substr(pos, next - pos);
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0' || !(v > 0.0)) {
      throw std::invalid_argument(what + ": values must be positive numbers, got '" + cell + "'");
    }
    values.push_back(v);
    pos = next + 1;
  }
  return values;
}

}  // namespace jgl
