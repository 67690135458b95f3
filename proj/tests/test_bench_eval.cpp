#include "jgl/bench_eval.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "jgl/jgl_solver.hpp"
#include "oracles.hpp"

using jgl::GroundTruth;
using jgl::Matrix;
using jgl::PrecisionSet;
using jgl::RocCounts;
using jgl::SyntheticSpec;
using jgl::testing::TestRng;

namespace {

SyntheticSpec small_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.p = 10;
  spec.classes = 2;
  spec.total_samples = 60;
  spec.edge_density = 0.1;
  spec.common_fraction = 0.5;
  spec.seed = seed;
  return spec;
}

bool identical(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a - b).cwiseAbs().maxCoeff() == 0.0;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  const GroundTruth a = jgl::generate(small_spec(5));
  const GroundTruth b = jgl::generate(small_spec(5));
  const GroundTruth c = jgl::generate(small_spec(6));
  for (std::size_t k = 0; k < a.true_theta.size(); ++k) {
    CHECK(identical(a.true_theta[k], b.true_theta[k]));
    CHECK(identical(a.samples.samples[k], b.samples.samples[k]));
    CHECK(a.true_edges[k] == b.true_edges[k]);
  }
  CHECK_FALSE(identical(a.true_theta[0], c.true_theta[0]));
}

TEST_CASE("common fraction one shares the support across classes") {
  SyntheticSpec spec = small_spec(7);
  spec.common_fraction = 1.0;
  const GroundTruth truth = jgl::generate(spec);
  CHECK(truth.true_edges[0] == truth.true_edges[1]);
  CHECK_FALSE(truth.true_edges[0].empty());
}

TEST_CASE("vanishing density gives the identity precision") {
  SyntheticSpec spec = small_spec(9);
  spec.edge_density = 1e-6;  // rounds to zero edges
  const GroundTruth truth = jgl::generate(spec);
  for (std::size_t k = 0; k < truth.true_theta.size(); ++k) {
    CHECK(truth.true_edges[k].empty());
    // 0.1 I inverts to 10 I whose unit-diagonal rescale is exactly I.
    CHECK((truth.true_theta[k] - Matrix::Identity(spec.p, spec.p)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("generator keeps the eigenvalue margin across one hundred seeds") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const GroundTruth truth = jgl::generate(small_spec(seed));
    for (const Matrix& theta : truth.true_theta) {
      const std::vector<double> ev = jgl::testing::jacobi_eigenvalues(theta);
      CHECK(ev.front() >= 0.1 - 1e-9);
    }
  }
}

TEST_CASE("infeasible density fails with a clear error") {
  SyntheticSpec spec = small_spec(11);
  spec.p = 20;
  spec.edge_density = 0.7;
  spec.signal_lo = 0.3;
  spec.signal_hi = 0.9;
  CHECK_THROWS_AS(jgl::generate(spec), std::invalid_argument);
}

TEST_CASE("spec validation") {
  SyntheticSpec spec = small_spec(13);
  spec.edge_density = 1.0;
  CHECK_THROWS_AS(jgl::generate(spec), std::invalid_argument);
  spec = small_spec(13);
  spec.signal_lo = 0.0;
  CHECK_THROWS_AS(jgl::generate(spec), std::invalid_argument);
  spec = small_spec(13);
  spec.common_fraction = 1.5;
  CHECK_THROWS_AS(jgl::generate(spec), std::invalid_argument);
  spec = small_spec(13);
  spec.class_shares = {1.0};
  CHECK_THROWS_AS(jgl::generate(spec), std::invalid_argument);
  spec = small_spec(13);
  spec.class_shares = {1.0, 1e-9};  // second class rounds to zero samples
  CHECK_THROWS_AS(jgl::generate(spec), std::invalid_argument);
}

TEST_CASE("class shares apportion the total sample count") {
  SyntheticSpec spec = small_spec(15);
  spec.classes = 3;
  spec.total_samples = 100;
  spec.class_shares = {0.5, 0.3, 0.2};
  const GroundTruth truth = jgl::generate(spec);
  CHECK(truth.samples.samples[0].rows() == 50);
  CHECK(truth.samples.samples[1].rows() == 30);
  CHECK(truth.samples.samples[2].rows() == 20);
}

TEST_CASE("samples reproduce the implied covariance at scale") {
  SyntheticSpec spec;
  spec.p = 5;
  spec.classes = 1;
  spec.total_samples = 50000;
  spec.edge_density = 0.3;
  spec.signal_lo = 0.2;
  spec.signal_hi = 0.4;
  spec.seed = 17;
  const GroundTruth truth = jgl::generate(spec);
  const Matrix cov = jgl::invert_pd(jgl::SymMatrix(truth.true_theta[0])).mat();
  const Matrix empirical = jgl::empirical_covariance(truth.samples.samples[0]).mat();
  CHECK((empirical - cov).cwiseAbs().maxCoeff() <= 0.05);
}

TEST_CASE("roc counts match a brute-force loop and the partition identity") {
  TestRng rng(19);
  SyntheticSpec spec = small_spec(19);
  const GroundTruth truth = jgl::generate(spec);
  for (int trial = 0; trial < 20; ++trial) {
    PrecisionSet estimate;
    for (int k = 0; k < spec.classes; ++k) {
      Matrix m = rng.symmetric(spec.p, -0.5, 0.5);
      // Plant exact zeros so the default threshold is exercised.
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          if (std::abs(m(i, j)) < 0.2) m(i, j) = 0.0;
        }
      }
      estimate.push_back(m);
    }
    const double threshold = trial % 2 == 0 ? 0.0 : rng.uniform(0.0, 0.3);
    const RocCounts counts = jgl::roc_counts(truth, estimate, threshold);

    long tp = 0, fp = 0, fn = 0, tn = 0;
    for (int k = 0; k < spec.classes; ++k) {
      for (int i = 0; i < spec.p; ++i) {
        for (int j = i + 1; j < spec.p; ++j) {
          const bool real = truth.true_theta[static_cast<std::size_t>(k)](i, j) != 0.0;
          const bool sel = std::abs(estimate[static_cast<std::size_t>(k)](i, j)) > threshold;
          tp += real && sel;
          fp += !real && sel;
          fn += real && !sel;
          tn += !real && !sel;
        }
      }
    }
    CHECK(counts.tp == tp);
    CHECK(counts.fp == fp);
    CHECK(counts.fn == fn);
    CHECK(counts.tn == tn);
    CHECK(counts.tp + counts.fp + counts.fn + counts.tn ==
          spec.classes * spec.p * (spec.p - 1) / 2);
  }
}

TEST_CASE("roc count edge cases") {
  const GroundTruth truth = jgl::generate(small_spec(23));
  const RocCounts self = jgl::roc_counts(truth, truth.true_theta);
  CHECK(self.fp == 0);
  CHECK(self.fn == 0);

  PrecisionSet dense;
  for (const Matrix& t : truth.true_theta) {
    dense.push_back(Matrix::Ones(t.rows(), t.cols()));
  }
  const RocCounts all = jgl::roc_counts(truth, dense);
  CHECK(all.tp == self.tp);      // every true edge selected
  CHECK(all.fp == self.tn);      // every non-edge selected
  CHECK(all.fn == 0);
  CHECK(all.tn == 0);
}

TEST_CASE("roc curve over a real lambda ladder is monotone") {
  SyntheticSpec spec = small_spec(29);
  spec.p = 12;
  spec.total_samples = 160;
  const GroundTruth truth = jgl::generate(spec);
  const jgl::CovarianceSet data = jgl::covariances_from_dataset(truth.samples, true);

  jgl::SolverOptions opts;
  opts.eps = 1e-6;
  opts.max_iter = 3000;
  std::vector<PrecisionSet> fits;
  for (const double l1 : {1.2, 0.6, 0.3, 0.15}) {  // decreasing lambda1
    fits.push_back(jgl::fit_ista(data, jgl::PenaltySpec(l1, 0.05, jgl::PenaltyKind::fused), opts)
                       .estimate);
  }
  const auto curve = jgl::roc_curve(truth, fits);
  REQUIRE(curve.size() == 4);
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    // Selected totals grow as lambda1 falls.
    CHECK(curve[i].first + curve[i].second <= curve[i + 1].first + curve[i + 1].second);
  }

  PrecisionSet diagonal;
  for (const Matrix& t : truth.true_theta) {
    diagonal.push_back(Matrix::Identity(t.rows(), t.cols()));
  }
  const auto empty_point = jgl::roc_curve(truth, {diagonal});
  REQUIRE(empty_point.size() == 1);
  CHECK(empty_point[0] == std::pair<long, long>{0, 0});
}

TEST_CASE("mse closed forms and brute-force agreement") {
  const GroundTruth truth = jgl::generate(small_spec(31));
  CHECK(jgl::mse(truth, truth.true_theta) == 0.0);

  // K=1, p=2, single off-diagonal deviation of 0.3.
  GroundTruth tiny;
  tiny.true_theta.push_back(Matrix::Identity(2, 2));
  PrecisionSet shifted = tiny.true_theta;
  shifted[0](0, 1) = shifted[0](1, 0) = 0.3;
  CHECK(jgl::mse(tiny, shifted) == doctest::Approx(0.09).epsilon(1e-12));

  TestRng rng(37);
  PrecisionSet estimate;
  for (const Matrix& t : truth.true_theta) estimate.push_back(rng.symmetric(t.rows(), -1.0, 1.0));
  double sum = 0.0;
  for (std::size_t k = 0; k < estimate.size(); ++k) {
    for (Eigen::Index i = 0; i < estimate[k].rows(); ++i) {
      for (Eigen::Index j = i + 1; j < estimate[k].cols(); ++j) {
        const double d = estimate[k](i, j) - truth.true_theta[k](i, j);
        sum += d * d;
      }
    }
  }
  const double p = static_cast<double>(truth.true_theta[0].rows());
  const double expected = 2.0 / (2.0 * p * (p - 1.0)) * sum;
  CHECK(jgl::mse(truth, estimate) == doctest::Approx(expected).epsilon(1e-12));

  // Relabeling both sides together leaves the metric unchanged, up to the
  // reordered floating-point accumulation.
  GroundTruth swapped;
  swapped.true_theta = {truth.true_theta[1], truth.true_theta[0]};
  CHECK(jgl::mse(swapped, {estimate[1], estimate[0]}) ==
        doctest::Approx(jgl::mse(truth, estimate)).epsilon(1e-14));
}

TEST_CASE("convergence trace drops the floor and keeps monotone gaps") {
  jgl::SolverReport report;
  report.objective_trace = {10.0, 10.0, 10.0};
  CHECK(jgl::convergence_trace(report, 10.0).empty());

  report.objective_trace = {11.0, 10.5, 10.1, 10.0 + 5e-13};
  const auto trace = jgl::convergence_trace(report, 10.0);
  REQUIRE(trace.size() == 3);  // the 5e-13 gap sits inside the floating slack
  CHECK(trace[0].first == 0);
  CHECK(trace[0].second == doctest::Approx(0.0));
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) CHECK(trace[i + 1].second < trace[i].second);

  report.objective_trace = {9.0};
  CHECK_THROWS_AS(jgl::convergence_trace(report, 10.0), std::invalid_argument);
}
