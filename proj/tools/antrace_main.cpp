#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "antrace/criteria.hpp"
#include "antrace/dataset_io.hpp"
#include "antrace/dof.hpp"
#include "antrace/reports.hpp"
#include "antrace/simulate.hpp"
#include "antrace/solver.hpp"
#include "antrace/weights.hpp"

namespace {

using antrace::Json;

struct CommonArgs {
  std::string data_path;
  std::string out_dir;
  double gamma = 1.0;
  bool standardize = false;
  bool standardize_response = false;
  double tol = 1e-7;
  int max_iter = 20000;
};

std::string default_out_dir() {
  const char* env = std::getenv("ANTRACE_OUT_DIR");
  return env != nullptr && *env != '\0' ? env : ".";
}

void add_common(CLI::App* cmd, CommonArgs* args, bool needs_data) {
  auto* data = cmd->add_option("--data", args->data_path, "dataset CSV path");
  if (needs_data) data->required();
  cmd->add_option("--out", args->out_dir, "output directory")
      ->default_val(default_out_dir());
  cmd->add_option("--gamma", args->gamma, "weight exponent in (0,1]")
      ->default_val(1.0);
  cmd->add_flag("--standardize", args->standardize,
                "center and scale design columns");
  cmd->add_flag("--standardize-response", args->standardize_response,
                "center and scale the response column");
  cmd->add_option("--tol", args->tol, "solver stationarity tolerance")
      ->default_val(1e-7);
  cmd->add_option("--max-iter", args->max_iter, "solver iteration cap")
      ->default_val(20000);
}

antrace::SolverOptions solver_options(const CommonArgs& args) {
  antrace::SolverOptions opts;
  opts.kkt_tolerance = args.tol;
  opts.max_iterations = args.max_iter;
  return opts;
}

Json common_config(const CommonArgs& args) {
  Json j;
  j["data"] = args.data_path;
  j["out"] = args.out_dir;
  j["gamma"] = args.gamma;
  j["standardize"] = args.standardize;
  j["standardize_response"] = args.standardize_response;
  j["tol"] = args.tol;
  j["max_iter"] = args.max_iter;
  return j;
}

std::string out_path(const CommonArgs& args, const std::string& name) {
  std::filesystem::create_directories(args.out_dir);
  return (std::filesystem::path(args.out_dir) / name).string();
}

antrace::LambdaGrid make_grid(const antrace::TraceDataset& data,
                              const antrace::WeightPair& w,
                              const std::string& scheme, int count,
                              double lambda_min_ratio) {
  const double lmax = antrace::lambda_max(data, w);
  if (!(lmax > 0.0)) {
    throw std::runtime_error("lambda_max is zero; responses are all zero");
  }
  if (scheme == "log") {
    return antrace::log_grid(lmax, lambda_min_ratio * lmax, count);
  }
  return antrace::geometric_grid(lmax, count);
}

int run_fit(const CommonArgs& args, double lambda) {
  const antrace::TraceDataset data = antrace::load_dataset(
      args.data_path, args.standardize, args.standardize_response);
  const antrace::WeightPair w =
      antrace::build_weights(antrace::fit_least_squares(data), data.n, args.gamma);
  const antrace::FitResult fit =
      antrace::solve(data, w, lambda, solver_options(args));

  Json config = common_config(args);
  config["command"] = "fit";
  config["lambda"] = lambda;
  antrace::write_report(antrace::to_json(fit), config,
                        out_path(args, "report.json"));
  std::cout << "lambda " << fit.lambda << "  rank " << fit.rank
            << "  objective " << fit.objective << "  kkt "
            << fit.optimality_residual << "  iterations " << fit.iterations
            << (fit.converged ? "" : "  [NOT CONVERGED]") << '\n';
  return fit.converged ? 0 : 2;
}

int run_df(const CommonArgs& args, double lambda) {
  const antrace::TraceDataset data = antrace::load_dataset(
      args.data_path, args.standardize, args.standardize_response);
  const antrace::WeightPair w =
      antrace::build_weights(antrace::fit_least_squares(data), data.n, args.gamma);
  const antrace::FitResult fit =
      antrace::solve(data, w, lambda, solver_options(args));
  const antrace::DofEstimate est =
      antrace::degrees_of_freedom(data, w, fit, lambda);

  Json config = common_config(args);
  config["command"] = "df";
  config["lambda"] = lambda;
  antrace::write_report(antrace::to_json(est), config,
                        out_path(args, "report.json"));
  std::cout << "lambda " << lambda << "  df " << est.df << "  rank "
            << fit.rank << "  gram_rank " << est.gram_rank << '\n';
  return fit.converged ? 0 : 2;
}

int run_select(const CommonArgs& args, const std::string& method_name,
               const std::string& grid_scheme, int grid_count,
               double lambda_min_ratio, int folds, std::uint64_t seed) {
  const antrace::TraceDataset data = antrace::load_dataset(
      args.data_path, args.standardize, args.standardize_response);
  const antrace::WeightPair w =
      antrace::build_weights(antrace::fit_least_squares(data), data.n, args.gamma);
  const antrace::LambdaGrid grid =
      make_grid(data, w, grid_scheme, grid_count, lambda_min_ratio);

  antrace::Method method = antrace::Method::bic;
  if (method_name == "aic") method = antrace::Method::aic;
  else if (method_name == "aicc") method = antrace::Method::aicc;
  else if (method_name == "cv") method = antrace::Method::cv;

  antrace::SelectOptions opts;
  opts.gamma = args.gamma;
  opts.k_folds = folds;
  opts.seed = seed;
  opts.solver = solver_options(args);
  const antrace::SelectionReport report =
      antrace::select_model(data, grid, method, opts);

  Json config = common_config(args);
  config["command"] = "select";
  config["method"] = method_name;
  config["grid"] = grid_scheme;
  config["grid_count"] = grid_count;
  config["lambda_min_ratio"] = lambda_min_ratio;
  config["folds"] = folds;
  config["seed"] = seed;
  antrace::write_report(antrace::to_json(report), config,
                        out_path(args, "report.json"));

  {
    std::ofstream csv(out_path(args, "table.csv"));
    csv.precision(17);
    csv << "method,lambda_star,mse,rank,time_seconds\n"
        << method_name << ',' << report.chosen_lambda << ',' << report.mse
        << ',' << report.chosen_rank << ',' << report.wall_time_seconds << '\n';
  }
  std::cout << "method " << method_name << "  chosen_lambda "
            << report.chosen_lambda << "  rank " << report.chosen_rank
            << "  mse " << report.mse << "  time " << report.wall_time_seconds
            << "s  solves " << report.solver_invocations
            << (report.any_failure ? "  [WITH FAILURES]" : "") << '\n';
  return report.any_failure ? 2 : 0;
}

int run_simulate(const CommonArgs& args, antrace::SimulationConfig cfg,
                 const std::string& grid_scheme) {
  cfg.gamma = args.gamma;
  cfg.solver = solver_options(args);
  cfg.grid_scheme = grid_scheme == "log" ? antrace::GridScheme::log_interpolated
                                         : antrace::GridScheme::geometric;
  const antrace::StudyTable table = antrace::replicate_study(cfg);

  Json config = common_config(args);
  config["command"] = "simulate";
  config["p1"] = cfg.p1;
  config["p2"] = cfg.p2;
  config["n"] = cfg.n;
  config["true_rank"] = cfg.true_rank;
  config["noise_std"] = cfg.noise_std;
  config["seed"] = cfg.seed;
  config["replicates"] = cfg.replicates;
  config["grid"] = grid_scheme;
  config["grid_count"] = cfg.grid_count;
  config["lambda_min_ratio"] = cfg.lambda_min_ratio;
  antrace::write_report(antrace::to_json(table), config,
                        out_path(args, "study.json"));
  {
    std::ofstream csv(out_path(args, "table.csv"));
    csv << antrace::study_csv(table);
  }
  std::cout << antrace::study_csv(table);
  for (const antrace::ReplicateOutcome& rep : table.replicates) {
    if (rep.failed) {
      std::cerr << "replicate " << rep.replicate << " failed: " << rep.error
                << '\n';
      return 2;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive nuclear-norm trace regression"};
  app.require_subcommand(1);

  CommonArgs fit_args, df_args, sel_args, sim_args;
  double fit_lambda = 0.0, df_lambda = 0.0;

  CLI::App* fit = app.add_subcommand("fit", "solve at one lambda");
  add_common(fit, &fit_args, true);
  fit->add_option("--lambda", fit_lambda, "regularization level")->required();

  CLI::App* df = app.add_subcommand("df", "degrees of freedom at one lambda");
  add_common(df, &df_args, true);
  df->add_option("--lambda", df_lambda, "regularization level")->required();

  CLI::App* sel = app.add_subcommand("select", "tuning-parameter selection");
  add_common(sel, &sel_args, true);
  std::string method = "bic", sel_grid = "geometric";
  int sel_count = 20, folds = 5;
  double min_ratio = 1e-4;
  std::uint64_t sel_seed = 0;
  sel->add_option("--method", method, "bic|aic|aicc|cv")
      ->check(CLI::IsMember({"bic", "aic", "aicc", "cv"}))
      ->default_val("bic");
  sel->add_option("--grid", sel_grid, "log|geometric")
      ->check(CLI::IsMember({"log", "geometric"}))
      ->default_val("geometric");
  sel->add_option("--grid-count", sel_count, "grid size")->default_val(20);
  sel->add_option("--lambda-min-ratio", min_ratio,
                  "log grid: lambda_min / lambda_max")
      ->default_val(1e-4);
  sel->add_option("--folds", folds, "cross-validation folds")->default_val(5);
  sel->add_option("--seed", sel_seed, "cross-validation seed")->default_val(0);

  CLI::App* sim = app.add_subcommand("simulate", "seeded replicate study");
  add_common(sim, &sim_args, false);
  antrace::SimulationConfig cfg;
  std::string sim_grid = "geometric";
  sim->add_option("--p1", cfg.p1)->default_val(8);
  sim->add_option("--p2", cfg.p2)->default_val(10);
  sim->add_option("--n", cfg.n)->default_val(200);
  sim->add_option("--rank", cfg.true_rank, "true rank")->default_val(2);
  sim->add_option("--noise", cfg.noise_std)->default_val(0.1);
  sim->add_option("--seed", cfg.seed)->default_val(0);
  sim->add_option("--replicates", cfg.replicates)->default_val(1);
  sim->add_option("--grid", sim_grid, "log|geometric")
      ->check(CLI::IsMember({"log", "geometric"}))
      ->default_val("geometric");
  sim->add_option("--grid-count", cfg.grid_count)->default_val(20);
  sim->add_option("--lambda-min-ratio", cfg.lambda_min_ratio)->default_val(1e-4);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) return run_fit(fit_args, fit_lambda);
    if (df->parsed()) return run_df(df_args, df_lambda);
    if (sel->parsed()) {
      return run_select(sel_args, method, sel_grid, sel_count, min_ratio,
                        folds, sel_seed);
    }
    if (sim->parsed()) return run_simulate(sim_args, cfg, sim_grid);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
