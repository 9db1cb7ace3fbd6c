#ifndef ANTRACE_CRITERIA_HPP
#define ANTRACE_CRITERIA_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "antrace/dataset.hpp"
#include "antrace/dof.hpp"
#include "antrace/solver.hpp"

namespace antrace {

enum class GridScheme { log_interpolated, geometric };

struct LambdaGrid {
  std::vector<double> values;  // strictly decreasing
  GridScheme scheme = GridScheme::geometric;
  double lambda_max = 0.0;
  std::optional<double> lambda_min;  // log scheme only
  int count = 0;
};

/// values[k] = exp(log(lambda_max) + (k-1) * (log(lambda_min) - log(lambda_max)) / count)
/// for k = 1..count.
LambdaGrid log_grid(double lambda_max, double lambda_min, int count);

/// values[k] = 0.618^k * lambda_max for k = 1..count.
LambdaGrid geometric_grid(double lambda_max, int count);

/// log(rss/n) + df * log(n)/n. rss = 0 returns -infinity (degenerate fit,
/// handled by the selection argmin).
double bic(double rss, double df, Eigen::Index n);

/// log(rss/n) + 2 df / n.
double aic(double rss, double df, Eigen::Index n);

/// aic + 2 df (df+1) / (n - df - 1); +infinity when n - df - 1 <= 0.
double aicc(double rss, double df, Eigen::Index n);

enum class Method { bic, aic, aicc, cv };
std::string method_name(Method m);

struct PerLambda {
  double lambda = 0.0;
  double criterion_value = 0.0;
  double df = 0.0;
  Eigen::Index rank = 0;
  double rss = 0.0;
  bool converged = true;
  bool degenerate = false;  // rss == 0 or df unavailable
};

struct SelectionReport {
  Method method = Method::bic;
  std::vector<PerLambda> per_lambda;
  double chosen_lambda = 0.0;
  Eigen::Index chosen_rank = 0;
  double mse = 0.0;       // ||yhat - y||^2 at the chosen lambda (a sum)
  double mse_mean = 0.0;  // mse / n
  double wall_time_seconds = 0.0;
  std::optional<int> fold_count;
  std::optional<std::uint64_t> seed;
  std::int64_t solver_invocations = 0;
  double gamma = 1.0;
  bool any_failure = false;  // a grid point failed to converge or degenerated
};

struct SelectOptions {
  double gamma = 1.0;
  int k_folds = 5;
  std::uint64_t seed = 0;
  SolverOptions solver;
  DofOptions dof;
};

/// Deterministic seeded fold assignment: returns fold index per sample.
std::vector<int> cv_fold_assignment(Eigen::Index n, int k_folds,
                                    std::uint64_t seed);

/// K-fold cross-validation over the grid. Weights are rebuilt from each
/// training fold; the per-lambda score is the mean validation MSE across
/// folds; ties in the argmin go to the largest lambda. A full-data path
/// supplies the refit at the chosen lambda and the per-lambda fit columns.
SelectionReport cross_validate(const TraceDataset& data, const LambdaGrid& grid,
                               int k_folds, std::uint64_t seed, double gamma,
                               const SolverOptions& solver_opts = {},
                               const DofOptions& dof_opts = {});

/// Tuning-parameter selection by the given method. Information criteria
/// cost exactly one warm-started path over the grid; cross-validation costs
/// k_folds + 1 paths.
SelectionReport select_model(const TraceDataset& data, const LambdaGrid& grid,
                             Method method, const SelectOptions& opts = {});

/// Runs several information criteria on one shared path (their fits, df
/// values and wall time are identical; only the criterion column differs).
std::vector<SelectionReport> select_information_criteria(
    const TraceDataset& data, const LambdaGrid& grid,
    const std::vector<Method>& methods, const SelectOptions& opts = {});

}  // namespace antrace

#endif
