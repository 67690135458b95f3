#include "jgl/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "jgl/bench_eval.hpp"
#include "oracles.hpp"

using jgl::Algorithm;
using jgl::ClassDataset;
using jgl::CvPlan;
using jgl::CvResult;
using jgl::FoldAssignments;
using jgl::Matrix;
using jgl::PenaltyKind;
using jgl::SolverOptions;
using jgl::testing::TestRng;

namespace {

ClassDataset random_dataset(TestRng& rng, int classes, int n, int p) {
  ClassDataset data;
  for (int k = 0; k < classes; ++k) data.samples.push_back(rng.matrix(n, p, -1.0, 1.0));
  return data;
}

std::vector<int> fold_sizes(const std::vector<int>& assign, int folds) {
  std::vector<int> sizes(static_cast<std::size_t>(folds), 0);
  for (int f : assign) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

}  // namespace

TEST_CASE("folds are balanced and cover every sample") {
  TestRng rng(211);
  const ClassDataset even = random_dataset(rng, 2, 10, 3);
  const FoldAssignments five = jgl::make_folds(even, 5, 7);
  for (const auto& assign : five) {
    const std::vector<int> sizes = fold_sizes(assign, 5);
    for (int s : sizes) CHECK(s == 2);
  }

  const ClassDataset uneven = random_dataset(rng, 1, 7, 3);
  std::vector<int> sizes = fold_sizes(jgl::make_folds(uneven, 3, 7)[0], 3);
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<int>{2, 2, 3});

  // Every sample lands in exactly one fold by construction; check the range.
  for (int f : five[0]) {
    CHECK(f >= 0);
    CHECK(f < 5);
  }
}

TEST_CASE("fold assignment is seed-deterministic") {
  TestRng rng(223);
  const ClassDataset data = random_dataset(rng, 2, 12, 3);
  CHECK(jgl::make_folds(data, 4, 99) == jgl::make_folds(data, 4, 99));
  CHECK(jgl::make_folds(data, 4, 99) != jgl::make_folds(data, 4, 100));
}

TEST_CASE("too many folds names the offending class") {
  TestRng rng(227);
  ClassDataset data;
  data.samples.push_back(rng.matrix(10, 3, -1.0, 1.0));
  data.samples.push_back(rng.matrix(4, 3, -1.0, 1.0));
  CHECK_THROWS_WITH_AS(jgl::make_folds(data, 5, 0),
                       "make_folds: class 1 has 4 samples, fewer than 5 folds",
                       std::invalid_argument);
}

TEST_CASE("single grid point is always best") {
  jgl::SyntheticSpec spec;
  spec.p = 6;
  spec.classes = 2;
  spec.total_samples = 80;
  spec.edge_density = 0.2;
  spec.seed = 5;
  const jgl::GroundTruth truth = jgl::generate(spec);

  CvPlan plan;
  plan.folds = 4;
  plan.grid = {{0.3, 0.1}};
  plan.seed = 11;
  SolverOptions opts;
  opts.eps = 1e-6;
  opts.max_iter = 2000;
  const CvResult result = jgl::cross_validate(truth.samples, plan, opts);
  CHECK(result.best_index == 0);
  CHECK(result.best.first == 0.3);
  CHECK(result.scores.size() == 1);
  CHECK(std::isfinite(result.scores[0]));
}

TEST_CASE("moderate penalty beats a fully diagonal model on structured data") {
  jgl::SyntheticSpec spec;
  spec.p = 12;
  spec.classes = 2;
  spec.total_samples = 240;
  spec.edge_density = 0.15;
  spec.common_fraction = 0.5;
  spec.signal_lo = 0.25;
  spec.signal_hi = 0.45;
  spec.seed = 17;
  const jgl::GroundTruth truth = jgl::generate(spec);

  // 5000 exceeds every gradient entry, so that point stays fully diagonal;
  // 9.0 is about a tenth of the per-fold training count, a moderate penalty.
  CvPlan plan;
  plan.folds = 4;
  plan.grid = {{5000.0, 0.05}, {9.0, 0.05}};
  plan.seed = 3;
  SolverOptions opts;
  opts.eps = 1e-6;
  opts.max_iter = 3000;
  const CvResult result = jgl::cross_validate(truth.samples, plan, opts);
  CHECK(result.best.first == 9.0);
  CHECK(result.scores[1] < result.scores[0]);
}

TEST_CASE("reported best score matches a scalar replay") {
  jgl::SyntheticSpec spec;
  spec.p = 8;
  spec.classes = 2;
  spec.total_samples = 120;
  spec.edge_density = 0.2;
  spec.seed = 23;
  const jgl::GroundTruth truth = jgl::generate(spec);
  const ClassDataset& data = truth.samples;

  CvPlan plan;
  plan.folds = 3;
  plan.grid = {{0.6, 0.1}, {0.2, 0.1}};
  plan.seed = 29;
  SolverOptions opts;
  opts.eps = 1e-7;
  opts.max_iter = 3000;
  const CvResult result = jgl::cross_validate(data, plan, opts);

  // Replay: rebuild the fold fits, then score them with scalar loops and the
  // Jacobi eigenvalue route for the log determinant.
  const FoldAssignments folds = result.fold_assignments;
  double replay = 0.0;
  for (int d = 0; d < plan.folds; ++d) {
    std::vector<jgl::SymMatrix> mats;
    std::vector<int> counts;
    for (int k = 0; k < data.classes(); ++k) {
      const Matrix& full = data.samples[static_cast<std::size_t>(k)];
      std::vector<int> rows;
      for (int i = 0; i < full.rows(); ++i) {
        if (folds[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] != d) rows.push_back(i);
      }
      Matrix train(rows.size(), full.cols());
      for (std::size_t r = 0; r < rows.size(); ++r) train.row(static_cast<Eigen::Index>(r)) = full.row(rows[r]);
      mats.push_back(jgl::empirical_covariance(jgl::center_columns(train)));
      counts.push_back(static_cast<int>(rows.size()));
    }
    const jgl::PenaltySpec best_spec(result.best.first, result.best.second, plan.kind);
    const jgl::FitResult fit =
        jgl::fit_ista(jgl::CovarianceSet(mats, counts), best_spec, opts);

    for (int k = 0; k < data.classes(); ++k) {
      const Matrix& full = data.samples[static_cast<std::size_t>(k)];
      std::vector<int> rows;
      for (int i = 0; i < full.rows(); ++i) {
        if (folds[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] == d) rows.push_back(i);
      }
      const std::size_t nt = rows.size();
      const std::size_t p = static_cast<std::size_t>(full.cols());
      std::vector<double> mean(p, 0.0);
      for (int r : rows) {
        for (std::size_t j = 0; j < p; ++j) mean[j] += full(r, static_cast<Eigen::Index>(j));
      }
      for (double& m : mean) m /= static_cast<double>(nt);
      std::vector<std::vector<double>> s(p, std::vector<double>(p, 0.0));
      for (int r : rows) {
        for (std::size_t i = 0; i < p; ++i) {
          for (std::size_t j = 0; j < p; ++j) {
            s[i][j] += (full(r, static_cast<Eigen::Index>(i)) - mean[i]) *
                       (full(r, static_cast<Eigen::Index>(j)) - mean[j]);
          }
        }
      }
      const Matrix& theta = fit.estimate[static_cast<std::size_t>(k)];
      double trace = 0.0;
      for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
          trace += s[i][j] / static_cast<double>(nt) * theta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
      }
      double logdet = 0.0;
      for (double ev : jgl::testing::jacobi_eigenvalues(theta)) logdet += std::log(ev);
      replay += static_cast<double>(full.rows()) * trace - logdet;
    }
  }
  const double reported = result.scores[result.best_index];
  CHECK(std::abs(replay - reported) <= 1e-8 * std::max(1.0, std::abs(reported)));
}

TEST_CASE("cross validation is reproducible and thread-count invariant") {
  jgl::SyntheticSpec spec;
  spec.p = 6;
  spec.classes = 2;
  spec.total_samples = 90;
  spec.edge_density = 0.2;
  spec.seed = 31;
  const jgl::GroundTruth truth = jgl::generate(spec);

  CvPlan plan;
  plan.folds = 3;
  plan.grid = {{0.5, 0.1}, {0.25, 0.1}, {0.25, 0.3}};
  plan.seed = 37;
  plan.jobs = 3;
  SolverOptions opts;
  opts.eps = 1e-6;
  opts.max_iter = 2000;

  const CvResult a = jgl::cross_validate(truth.samples, plan, opts);
  const CvResult b = jgl::cross_validate(truth.samples, plan, opts);
  plan.jobs = 1;
  const CvResult c = jgl::cross_validate(truth.samples, plan, opts);

  REQUIRE(a.scores.size() == b.scores.size());
  for (std::size_t g = 0; g < a.scores.size(); ++g) {
    CHECK(a.scores[g] == b.scores[g]);
    CHECK(a.scores[g] == c.scores[g]);
  }
  CHECK(a.best_index == b.best_index);
  CHECK(a.best_index == c.best_index);
  CHECK(a.fold_assignments == b.fold_assignments);
}

TEST_CASE("exact score ties prefer the smaller lambda2") {
  // Group coupling never touches the diagonal and saturated off-diagonals are
  // zeroed all the way down the iteration, so these two grid points run
  // identical iterate sequences and tie exactly.
  jgl::SyntheticSpec spec;
  spec.p = 5;
  spec.classes = 2;
  spec.total_samples = 60;
  spec.edge_density = 0.2;
  spec.seed = 41;
  const jgl::GroundTruth truth = jgl::generate(spec);

  CvPlan plan;
  plan.folds = 3;
  plan.kind = PenaltyKind::group;
  plan.grid = {{0.4, 90.0}, {0.4, 80.0}};
  plan.seed = 43;
  SolverOptions opts;
  opts.eps = 1e-6;
  opts.max_iter = 1000;
  const CvResult result = jgl::cross_validate(truth.samples, plan, opts);
  REQUIRE(result.scores[0] == result.scores[1]);
  CHECK(result.best_index == 1);
  CHECK(result.best.second == 80.0);
}

TEST_CASE("failed fits are recorded as infinity, not fatal") {
  TestRng rng(47);
  ClassDataset data = random_dataset(rng, 2, 12, 4);
  data.samples[0](3, 2) = std::numeric_limits<double>::quiet_NaN();

  CvPlan plan;
  plan.folds = 3;
  plan.grid = {{0.4, 0.1}, {0.2, 0.1}};
  plan.seed = 53;
  const CvResult result = jgl::cross_validate(data, plan, SolverOptions{});
  for (double s : result.scores) CHECK(std::isinf(s));
  CHECK(result.best_index == 1);  // all-infinite ties resolve to smallest lambda1
}

TEST_CASE("plan validation") {
  TestRng rng(59);
  const ClassDataset data = random_dataset(rng, 1, 9, 3);
  CvPlan plan;
  plan.folds = 3;
  plan.grid = {{0.1, 0.1}};
  plan.seed = 1;

  CvPlan bad = plan;
  bad.grid.clear();
  CHECK_THROWS_AS(jgl::cross_validate(data, bad, SolverOptions{}), std::invalid_argument);
  bad = plan;
  bad.grid = {{0.1, 0.0}};
  CHECK_THROWS_AS(jgl::cross_validate(data, bad, SolverOptions{}), std::invalid_argument);
  bad = plan;
  bad.algorithm = Algorithm::gista;
  CHECK_THROWS_AS(jgl::cross_validate(data, bad, SolverOptions{}), std::invalid_argument);
  bad = plan;
  bad.folds = 1;
  CHECK_THROWS_AS(jgl::cross_validate(data, bad, SolverOptions{}), std::invalid_argument);
  bad = plan;
  bad.jobs = 0;
  CHECK_THROWS_AS(jgl::cross_validate(data, bad, SolverOptions{}), std::invalid_argument);
}

TEST_CASE("grid axis parsing") {
  const std::vector<double> explicit_axis = jgl::parse_grid_axis("0.05,0.1,0.2", "--grid-l1");
  CHECK(explicit_axis == std::vector<double>{0.05, 0.1, 0.2});

  const std::vector<double> log_axis = jgl::parse_grid_axis("log:3:0.01:1", "--grid-l1");
  REQUIRE(log_axis.size() == 3);
  CHECK(log_axis[0] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(log_axis[1] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(log_axis[2] == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(jgl::parse_grid_axis("log:1:0.5:0.5", "x") == std::vector<double>{0.5});
  CHECK_THROWS_AS(jgl::parse_grid_axis("", "x"), std::invalid_argument);
  CHECK_THROWS_AS(jgl::parse_grid_axis("0.1,-0.2", "x"), std::invalid_argument);
  CHECK_THROWS_AS(jgl::parse_grid_axis("0.1,abc", "x"), std::invalid_argument);
  CHECK_THROWS_AS(jgl::parse_grid_axis("log:0:0.1:1", "x"), std::invalid_argument);
  CHECK_THROWS_AS(jgl::parse_grid_axis("log:3:1:0.1", "x"), std::invalid_argument);
}
