#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "jgl/bench_eval.hpp"
#include "jgl/jgl_solver.hpp"
#include "jgl/matrix_core.hpp"
#include "jgl/model_selection.hpp"
#include "jgl/prox_ops.hpp"
#include "jgl/solver_core.hpp"

namespace py = pybind11;

namespace {

jgl::PenaltyKind kind_from(const std::string& name) {
  if (name == "fused") return jgl::PenaltyKind::fused;
  if (name == "group") return jgl::PenaltyKind::group;
  throw std::invalid_argument("penalty must be 'fused' or 'group'");
}

jgl::Algorithm algorithm_from(const std::string& name) {
  if (name == "ista") return jgl::Algorithm::ista;
  if (name == "mista") return jgl::Algorithm::mista;
  throw std::invalid_argument("algorithm must be 'ista' or 'mista'");
}

const char* status_name(jgl::SolverStatus status) {
  switch (status) {
    case jgl::SolverStatus::converged: return "converged";
    case jgl::SolverStatus::max_iterations: return "max_iterations";
    default: return "numerical_failure";
  }
}

jgl::SolverOptions make_options(double eps, int max_iter) {
  jgl::SolverOptions opts;
  opts.eps = eps;
  opts.max_iter = max_iter;
  return opts;
}

jgl::StepInit step_from(const std::string& name) {
  if (name == "bb") return jgl::StepInit::barzilai_borwein;
  if (name == "safe") return jgl::StepInit::safe;
  if (name == "fixed") return jgl::StepInit::fixed;
  throw std::invalid_argument("step must be 'bb', 'safe', or 'fixed'");
}

jgl::CovarianceSet covariance_set(const std::vector<jgl::Matrix>& s, const std::vector<int>& n) {
  std::vector<jgl::SymMatrix> mats;
  mats.reserve(s.size());
  for (const jgl::Matrix& m : s) mats.emplace_back(m);
  return jgl::CovarianceSet(std::move(mats), n);
}

py::dict fit_to_dict(const jgl::FitResult& fit) {
  py::dict report;
  report["status"] = status_name(fit.report.status);
  report["iterations"] = fit.report.iterations;
  report["final_objective"] = fit.report.final_objective;
  report["final_relative_error"] = fit.report.final_relative_error;
  report["objective_trace"] = fit.report.objective_trace;
  report["duality_gap"] = fit.report.duality_gap;
  report["lambda_c"] = fit.bounds.lambda_c;
  py::dict out;
  out["theta"] = fit.estimate;
  out["report"] = report;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "joint graphical lasso core operations";

  m.def("soft_threshold", &jgl::soft_threshold, py::arg("x"), py::arg("lam"));
  m.def("flsa_group", &jgl::flsa_group, py::arg("a"), py::arg("alpha1"), py::arg("alpha2"));
  m.def("group_shrink", &jgl::group_shrink, py::arg("a"), py::arg("alpha1"), py::arg("alpha2"));

  m.def(
      "empirical_covariance",
      [](const jgl::Matrix& samples) { return jgl::empirical_covariance(samples).mat(); },
      py::arg("samples"));

  m.def(
      "fit",
      [](const std::vector<jgl::Matrix>& s, const std::vector<int>& n, double lambda1,
         double lambda2, const std::string& penalty, const std::string& algorithm, double eps,
         int max_iter, const std::string& step, double eta0) {
        const jgl::CovarianceSet data = covariance_set(s, n);
        const jgl::PenaltySpec spec(lambda1, lambda2, kind_from(penalty));
        jgl::SolverOptions opts = make_options(eps, max_iter);
        opts.step_init = step_from(step);
        opts.eta0 = eta0;
        const jgl::FitResult fit = algorithm_from(algorithm) == jgl::Algorithm::mista
                                       ? jgl::fit_mista(data, spec, opts)
                                       : jgl::fit_ista(data, spec, opts);
        return fit_to_dict(fit);
      },
      py::arg("covariances"), py::arg("sample_counts"), py::arg("lambda1"), py::arg("lambda2"),
      py::arg("penalty") = "fused", py::arg("algorithm") = "ista", py::arg("eps") = 1e-5,
      py::arg("max_iter") = 500, py::arg("step") = "bb", py::arg("eta0") = 1.0);

  m.def(
      "fit_gista",
      [](const jgl::Matrix& s, double lam, double eps, int max_iter) {
        return fit_to_dict(jgl::fit_gista(jgl::SymMatrix(s), lam, make_options(eps, max_iter)));
      },
      py::arg("covariance"), py::arg("lam"), py::arg("eps") = 1e-5, py::arg("max_iter") = 500);

  m.def(
      "duality_gap",
      [](const jgl::Matrix& theta, const jgl::Matrix& s, double lam) {
        return jgl::duality_gap(theta, jgl::SymMatrix(s), lam);
      },
      py::arg("theta"), py::arg("covariance"), py::arg("lam"));

  m.def(
      "generate",
      [](int p, int classes, int total_samples, double edge_density, double common_fraction,
         double signal_lo, double signal_hi, std::uint64_t seed) {
        jgl::SyntheticSpec spec;
        spec.p = p;
        spec.classes = classes;
        spec.total_samples = total_samples;
        spec.edge_density = edge_density;
        spec.common_fraction = common_fraction;
        spec.signal_lo = signal_lo;
        spec.signal_hi = signal_hi;
        spec.seed = seed;
        const jgl::GroundTruth truth = jgl::generate(spec);
        py::dict out;
        out["theta"] = truth.true_theta;
        out["edges"] = truth.true_edges;
        out["samples"] = truth.samples.samples;
        return out;
      },
      py::arg("p"), py::arg("classes"), py::arg("total_samples"), py::arg("edge_density") = 0.05,
      py::arg("common_fraction") = 0.8, py::arg("signal_lo") = 0.1, py::arg("signal_hi") = 0.3,
      py::arg("seed") = 0);

  m.def(
      "cross_validate",
      [](const std::vector<jgl::Matrix>& samples,
         const std::vector<std::pair<double, double>>& grid, int folds, std::uint64_t seed,
         const std::string& penalty, const std::string& algorithm, bool center, int jobs,
         double eps, int max_iter) {
        jgl::ClassDataset data;
        data.samples = samples;
        jgl::CvPlan plan;
        plan.folds = folds;
        plan.grid = grid;
        plan.seed = seed;
        plan.kind = kind_from(penalty);
        plan.algorithm = algorithm_from(algorithm);
        plan.center = center;
        plan.jobs = jobs;
        const jgl::CvResult result = jgl::cross_validate(data, plan, make_options(eps, max_iter));
        py::dict out;
        out["scores"] = result.scores;
        out["best"] = result.best;
        out["best_index"] = result.best_index;
        out["fold_assignments"] = result.fold_assignments;
        return out;
      },
      py::arg("samples"), py::arg("grid"), py::arg("folds") = 5, py::arg("seed") = 0,
      py::arg("penalty") = "fused", py::arg("algorithm") = "ista", py::arg("center") = true,
      py::arg("jobs") = 1, py::arg("eps") = 1e-5, py::arg("max_iter") = 500);

  m.def(
      "roc_counts",
      [](const std::vector<jgl::Matrix>& truth, const std::vector<jgl::Matrix>& estimate,
         double threshold) {
        jgl::GroundTruth wrapped;
        wrapped.true_theta = truth;
        const jgl::RocCounts c = jgl::roc_counts(wrapped, estimate, threshold);
        return py::make_tuple(c.tp, c.fp, c.fn, c.tn);
      },
      py::arg("truth_theta"), py::arg("estimate"), py::arg("threshold") = 0.0);

  m.def(
      "mse",
      [](const std::vector<jgl::Matrix>& truth, const std::vector<jgl::Matrix>& estimate) {
        jgl::GroundTruth wrapped;
        wrapped.true_theta = truth;
        return jgl::mse(wrapped, estimate);
      },
      py::arg("truth_theta"), py::arg("estimate"));
}
