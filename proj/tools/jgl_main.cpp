#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "jgl/bench_eval.hpp"
#include "jgl/io.hpp"
#include "jgl/jgl_solver.hpp"
#include "jgl/matrix_core.hpp"
#include "jgl/model_selection.hpp"
#include "jgl/prox_ops.hpp"
#include "jgl/solver_core.hpp"

namespace {

using nlohmann::json;

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> parse_share_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) values.push_back(std::strtod(cell.c_str(), nullptr));
  return values;
}

jgl::Algorithm parse_algorithm(const std::string& name) {
  if (name == "ista") return jgl::Algorithm::ista;
  if (name == "mista") return jgl::Algorithm::mista;
  if (name == "gista") return jgl::Algorithm::gista;
  throw std::invalid_argument("--algorithm must be ista, mista or gista");
}

jgl::PenaltyKind parse_penalty(const std::string& name) {
  if (name == "fused") return jgl::PenaltyKind::fused;
  if (name == "group") return jgl::PenaltyKind::group;
  throw std::invalid_argument("--penalty must be fused or group");
}

const char* status_name(jgl::SolverStatus status) {
  switch (status) {
    case jgl::SolverStatus::converged: return "converged";
    case jgl::SolverStatus::max_iterations: return "max_iterations";
    default: return "numerical_failure";
  }
}

/// Solver flags shared by fit and cv.
struct SolverFlags {
  std::string stop_rule = "relative";
  std::string step_init = "bb";
  double eps = 1e-5;
  int max_iter = 500;
  double backtrack_c = 0.5;
  double eta0 = 1.0;
  std::optional<double> f_star;

  void attach(CLI::App* cmd) {
    cmd->add_option("--eps", eps, "stopping tolerance");
    cmd->add_option("--max-iter", max_iter, "iteration cap");
    cmd->add_option("--stop-rule", stop_rule, "relative | objective")
        ->check(CLI::IsMember({"relative", "objective"}));
    cmd->add_option("--f-star", f_star, "reference optimum for --stop-rule objective");
    cmd->add_option("--step-init", step_init, "bb | safe | fixed")
        ->check(CLI::IsMember({"bb", "safe", "fixed"}));
    cmd->add_option("--backtrack-c", backtrack_c, "backtracking shrink factor in (0,1)");
    cmd->add_option("--eta0", eta0, "initial (or fixed) step size");
  }

  jgl::SolverOptions options() const {
    jgl::SolverOptions opts;
    opts.eps = eps;
    opts.max_iter = max_iter;
    opts.backtrack_c = backtrack_c;
    opts.eta0 = eta0;
    opts.stop_rule =
        stop_rule == "objective" ? jgl::StopRule::objective_error : jgl::StopRule::relative_error;
    opts.step_init = step_init == "safe"    ? jgl::StepInit::safe
                     : step_init == "fixed" ? jgl::StepInit::fixed
                                            : jgl::StepInit::barzilai_borwein;
    opts.f_star = f_star;
    return opts;
  }
};

jgl::ClassDataset load_dataset(const std::vector<std::string>& paths) {
  jgl::ClassDataset data;
  for (const std::string& path : paths) data.samples.push_back(jgl::read_csv_matrix(path));
  for (const jgl::Matrix& m : data.samples) {
    if (m.cols() != data.samples.front().cols()) {
      throw std::invalid_argument("sample files disagree on the number of columns");
    }
  }
  return data;
}

json bounds_to_json(const jgl::BoundDiagnostics& b) {
  return json{{"lambda_c", b.lambda_c},
              {"lower", b.lower},
              {"upper", b.upper},
              {"iterate_lower", b.iterate_lower},
              {"iterate_upper", b.iterate_upper}};
}

void write_json_atomic(const std::string& path, const json& j) {
  jgl::write_text_atomic(path, j.dump(2) + "\n");
}

int run_fit(const std::vector<std::string>& sample_paths, const std::vector<std::string>& cov_paths,
            const std::vector<int>& cov_counts, const std::string& algorithm_name,
            const std::string& penalty_name, double lambda1, double lambda2, bool center,
            const SolverFlags& flags, const std::string& out_dir) {
  if (sample_paths.empty() == cov_paths.empty()) {
    throw std::invalid_argument("fit: supply either --input files or --cov files, not both");
  }
  const jgl::Algorithm algorithm = parse_algorithm(algorithm_name);

  std::vector<jgl::SymMatrix> mats;
  std::vector<int> counts;
  bool centered = false;
  if (!sample_paths.empty()) {
    const jgl::ClassDataset data = load_dataset(sample_paths);
    centered = center;
    const jgl::CovarianceSet cov = jgl::covariances_from_dataset(data, center);
    mats = cov.s;
    counts = cov.n;
  } else {
    if (cov_counts.size() != cov_paths.size()) {
      throw std::invalid_argument("fit: need one --n per --cov file");
    }
    for (std::size_t k = 0; k < cov_paths.size(); ++k) {
      mats.emplace_back(jgl::read_csv_matrix(cov_paths[k]));
      counts.push_back(cov_counts[k]);
    }
  }
  const jgl::CovarianceSet data(std::move(mats), std::move(counts));
  const jgl::SolverOptions opts = flags.options();

  jgl::FitResult fit;
  if (algorithm == jgl::Algorithm::gista) {
    if (data.classes() != 1) {
      throw std::invalid_argument("fit: gista is single-class; got " +
                                  std::to_string(data.classes()) + " classes");
    }
    fit = jgl::fit_gista(data.s.front(), lambda1, opts);
  } else {
    const jgl::PenaltySpec spec(lambda1, lambda2, parse_penalty(penalty_name));
    fit = algorithm == jgl::Algorithm::mista ? jgl::fit_mista(data, spec, opts)
                                             : jgl::fit_ista(data, spec, opts);
  }

  std::filesystem::create_directories(out_dir);
  for (std::size_t k = 0; k < fit.estimate.size(); ++k) {
    jgl::write_csv_matrix(out_dir + "/theta_" + std::to_string(k + 1) + ".csv", fit.estimate[k]);
  }
  jgl::write_edge_list(out_dir + "/edges.csv", fit.estimate);

  json report{{"algorithm", algorithm_name},
              {"lambda1", lambda1},
              {"classes", data.classes()},
              {"dimension", data.dim()},
              {"sample_counts", data.n},
              {"centered", centered},
              {"status", status_name(fit.report.status)},
              {"iterations", fit.report.iterations},
              {"final_objective", fit.report.final_objective},
              {"final_relative_error", fit.report.final_relative_error},
              {"objective_trace", fit.report.objective_trace},
              {"f_trace", fit.report.f_trace},
              {"step_trace", fit.report.step_trace},
              {"backtrack_counts", fit.report.backtrack_counts},
              {"bounds", bounds_to_json(fit.bounds)}};
  if (algorithm != jgl::Algorithm::gista) {
    report["penalty"] = penalty_name;
    report["lambda2"] = lambda2;
  }
  if (fit.report.duality_gap >= 0.0) report["duality_gap"] = fit.report.duality_gap;
  write_json_atomic(out_dir + "/report.json", report);
  return 0;
}

int run_cv(const std::vector<std::string>& sample_paths, const std::string& algorithm_name,
           const std::string& penalty_name, const std::string& grid_l1, const std::string& grid_l2,
           int folds, std::uint64_t seed, int jobs, bool center, const SolverFlags& flags,
           const std::string& out_dir) {
  const jgl::ClassDataset data = load_dataset(sample_paths);

  jgl::CvPlan plan;
  plan.folds = folds;
  plan.seed = seed;
  plan.kind = parse_penalty(penalty_name);
  plan.algorithm = parse_algorithm(algorithm_name);
  plan.center = center;
  plan.jobs = jobs;
  for (const double l1 : jgl::parse_grid_axis(grid_l1, "--grid-l1")) {
    for (const double l2 : jgl::parse_grid_axis(grid_l2, "--grid-l2")) {
      plan.grid.emplace_back(l1, l2);
    }
  }

  const jgl::CvResult result = jgl::cross_validate(data, plan, flags.options());

  std::filesystem::create_directories(out_dir);
  std::string table = "lambda1,lambda2,score\n";
  for (std::size_t g = 0; g < plan.grid.size(); ++g) {
    table += format_value(plan.grid[g].first) + "," + format_value(plan.grid[g].second) + "," +
             format_value(result.scores[g]) + "\n";
  }
  jgl::write_text_atomic(out_dir + "/cv_scores.csv", table);

  const json best{{"lambda1", result.best.first},
                  {"lambda2", result.best.second},
                  {"score", result.scores[result.best_index]},
                  {"folds", plan.folds},
                  {"seed", plan.seed},
                  {"algorithm", algorithm_name},
                  {"penalty", penalty_name},
                  {"fold_assignments", result.fold_assignments}};
  write_json_atomic(out_dir + "/cv_best.json", best);
  return 0;
}

int run_simulate(const jgl::SyntheticSpec& spec, const std::string& out_dir) {
  const jgl::GroundTruth truth = jgl::generate(spec);

  std::filesystem::create_directories(out_dir);
  std::vector<int> class_sizes;
  for (const jgl::Matrix& x : truth.samples.samples) class_sizes.push_back(static_cast<int>(x.rows()));
  const json manifest{{"p", spec.p},
                      {"classes", spec.classes},
                      {"total_samples", spec.total_samples},
                      {"class_shares", spec.class_shares},
                      {"class_sizes", class_sizes},
                      {"edge_density", spec.edge_density},
                      {"common_fraction", spec.common_fraction},
                      {"signal_lo", spec.signal_lo},
                      {"signal_hi", spec.signal_hi},
                      {"seed", spec.seed}};
  write_json_atomic(out_dir + "/manifest.json", manifest);

  std::string edges = "class,i,j,value\n";
  for (std::size_t k = 0; k < truth.true_theta.size(); ++k) {
    jgl::write_csv_matrix(out_dir + "/theta_true_" + std::to_string(k + 1) + ".csv",
                          truth.true_theta[k]);
    jgl::write_csv_matrix(out_dir + "/samples_" + std::to_string(k + 1) + ".csv",
                          truth.samples.samples[k]);
    for (const auto& [i, j] : truth.true_edges[k]) {
      edges += std::to_string(k + 1) + "," + std::to_string(i + 1) + "," + std::to_string(j + 1) +
               "," + format_value(truth.true_theta[k](i, j)) + "\n";
    }
  }
  jgl::write_text_atomic(out_dir + "/true_edges.csv", edges);
  return 0;
}

int run_eval(const std::string& truth_dir, const std::vector<std::string>& fit_dirs,
             const std::string& out_dir) {
  std::ifstream manifest_in(truth_dir + "/manifest.json");
  if (!manifest_in) throw std::runtime_error("cannot open " + truth_dir + "/manifest.json");
  const json manifest = json::parse(manifest_in);
  const int classes = manifest.at("classes").get<int>();

  jgl::GroundTruth truth;
  for (int k = 0; k < classes; ++k) {
    truth.true_theta.push_back(
        jgl::read_csv_matrix(truth_dir + "/theta_true_" + std::to_string(k + 1) + ".csv"));
  }

  std::string roc = "fit,lambda1,fp,tp,fn,tn\n";
  std::string mse_table = "fit,lambda1,mse\n";
  std::string trace = "fit,iteration,log10_gap\n";
  for (const std::string& dir : fit_dirs) {
    std::ifstream report_in(dir + "/report.json");
    if (!report_in) throw std::runtime_error("cannot open " + dir + "/report.json");
    const json report = json::parse(report_in);
    if (report.at("classes").get<int>() != classes) {
      throw std::invalid_argument(dir + ": fit has " + report.at("classes").dump() +
                                  " classes, truth has " + std::to_string(classes));
    }
    const double lambda1 = report.at("lambda1").get<double>();

    jgl::PrecisionSet estimate;
    for (int k = 0; k < classes; ++k) {
      estimate.push_back(jgl::read_csv_matrix(dir + "/theta_" + std::to_string(k + 1) + ".csv"));
    }

    const jgl::RocCounts counts = jgl::roc_counts(truth, estimate, 0.0);
    roc += dir + "," + format_value(lambda1) + "," + std::to_string(counts.fp) + "," +
           std::to_string(counts.tp) + "," + std::to_string(counts.fn) + "," +
           std::to_string(counts.tn) + "\n";
    mse_table += dir + "," + format_value(lambda1) + "," +
                 format_value(jgl::mse(truth, estimate)) + "\n";

    // Each fit's trace is plotted against its own terminal objective.
    jgl::SolverReport run;
    run.objective_trace = report.at("objective_trace").get<std::vector<double>>();
    for (const auto& [t, gap] : jgl::convergence_trace(run, report.at("final_objective").get<double>())) {
      trace += dir + "," + std::to_string(t) + "," + format_value(gap) + "\n";
    }
  }

  std::filesystem::create_directories(out_dir);
  jgl::write_text_atomic(out_dir + "/roc.csv", roc);
  jgl::write_text_atomic(out_dir + "/mse.csv", mse_table);
  jgl::write_text_atomic(out_dir + "/trace.csv", trace);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint graphical lasso toolkit"};
  app.require_subcommand(1);

  std::vector<std::string> sample_paths, cov_paths, fit_dirs;
  std::vector<int> cov_counts;
  std::string algorithm = "ista", penalty = "fused";
  std::string grid_l1, grid_l2, shares_text, out_dir, truth_dir;
  double lambda1 = 0.1, lambda2 = 0.1;
  bool center = true;
  int folds = 5, jobs = 1;
  std::uint64_t seed = 0;
  SolverFlags flags;
  jgl::SyntheticSpec spec;

  CLI::App* fit = app.add_subcommand("fit", "estimate precision matrices");
  fit->add_option("--input", sample_paths, "per-class sample CSV, repeat per class");
  fit->add_option("--cov", cov_paths, "per-class covariance CSV, repeat per class");
  fit->add_option("--n", cov_counts, "sample count per --cov file");
  fit->add_option("--algorithm", algorithm, "ista | mista | gista")
      ->check(CLI::IsMember({"ista", "mista", "gista"}));
  fit->add_option("--penalty", penalty, "fused | group")
      ->check(CLI::IsMember({"fused", "group"}));
  fit->add_option("--lambda1", lambda1, "sparsity weight");
  fit->add_option("--lambda2", lambda2, "similarity weight");
  fit->add_flag("--center,!--no-center", center, "subtract per-class column means (default on)");
  flags.attach(fit);
  fit->add_option("--out-dir", out_dir, "artifact directory")->required();

  CLI::App* cv = app.add_subcommand("cv", "cross-validate a lambda grid");
  cv->add_option("--input", sample_paths, "per-class sample CSV, repeat per class")->required();
  cv->add_option("--algorithm", algorithm, "ista | mista")
      ->check(CLI::IsMember({"ista", "mista"}));
  cv->add_option("--penalty", penalty, "fused | group")
      ->check(CLI::IsMember({"fused", "group"}));
  cv->add_option("--grid-l1", grid_l1, "comma list or log:COUNT:MIN:MAX")->required();
  cv->add_option("--grid-l2", grid_l2, "comma list or log:COUNT:MIN:MAX")->required();
  cv->add_option("--folds", folds, "cross-validation folds");
  cv->add_option("--seed", seed, "fold shuffle seed");
  cv->add_option("--jobs", jobs, "parallel fit tasks");
  cv->add_flag("--center,!--no-center", center, "subtract per-class column means (default on)");
  flags.attach(cv);
  cv->add_option("--out-dir", out_dir, "artifact directory")->required();

  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic ground-truth bundle");
  simulate->add_option("--p", spec.p, "dimension");
  simulate->add_option("--classes", spec.classes, "number of classes");
  simulate->add_option("--samples", spec.total_samples, "total sample count");
  simulate->add_option("--shares", shares_text, "per-class share list, default equal");
  simulate->add_option("--density", spec.edge_density, "edge density in (0,1)");
  simulate->add_option("--common-fraction", spec.common_fraction, "shared-support fraction");
  simulate->add_option("--signal-lo", spec.signal_lo, "smallest off-diagonal magnitude");
  simulate->add_option("--signal-hi", spec.signal_hi, "largest off-diagonal magnitude");
  simulate->add_option("--seed", seed, "generator seed");
  simulate->add_option("--out-dir", out_dir, "artifact directory")->required();

  CLI::App* eval = app.add_subcommand("eval", "score fits against a ground-truth bundle");
  eval->add_option("--truth-dir", truth_dir, "simulate output directory")->required();
  eval->add_option("--fit-dir", fit_dirs, "fit output directory, repeatable")->required();
  eval->add_option("--out-dir", out_dir, "artifact directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) {
      return run_fit(sample_paths, cov_paths, cov_counts, algorithm, penalty, lambda1, lambda2,
                     center, flags, out_dir);
    }
    if (*cv) {
      return run_cv(sample_paths, algorithm, penalty, grid_l1, grid_l2, folds, seed, jobs, center,
                    flags, out_dir);
    }
    if (*simulate) {
      spec.seed = seed;
      if (!shares_text.empty()) spec.class_shares = parse_share_list(shares_text);
      return run_simulate(spec, out_dir);
    }
    if (*eval) return run_eval(truth_dir, fit_dirs, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
