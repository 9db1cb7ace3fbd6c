#include "antrace/criteria.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "antrace/rng.hpp"
#include "antrace/weights.hpp"

namespace antrace {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

WeightPair weights_for(const TraceDataset& data, double gamma) {
  return build_weights(fit_least_squares(data), data.n, gamma);
}

// Argmin over the grid (stored largest-lambda first); ties and exact
// repeats resolve to the largest lambda. Degenerate entries are skipped
// unless every entry is degenerate.
std::size_t argmin_criterion(const std::vector<PerLambda>& rows) {
  std::size_t best = rows.size();
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].degenerate) continue;
    if (rows[i].criterion_value < best_value) {
      best_value = rows[i].criterion_value;
      best = i;
    }
  }
  if (best == rows.size()) {
    // all degenerate: fall back to the largest lambda
    best = 0;
  }
  return best;
}

double criterion_value(Method m, double rss, double df, Eigen::Index n) {
  switch (m) {
    case Method::bic: return bic(rss, df, n);
    case Method::aic: return aic(rss, df, n);
    case Method::aicc: return aicc(rss, df, n);
    case Method::cv: break;
  }
  throw std::logic_error("criterion_value: not an information criterion");
}

}  // namespace

LambdaGrid log_grid(double lambda_max, double lambda_min, int count) {
  if (!(lambda_max > 0.0) || !(lambda_min > 0.0)) {
    throw std::invalid_argument("log_grid: bounds must be positive");
  }
  if (!(lambda_min < lambda_max)) {
    throw std::invalid_argument("log_grid: lambda_min must be below lambda_max");
  }
  if (count < 1) {
    throw std::invalid_argument("log_grid: count must be positive");
  }
  LambdaGrid grid;
  grid.scheme = GridScheme::log_interpolated;
  grid.lambda_max = lambda_max;
  grid.lambda_min = lambda_min;
  grid.count = count;
  grid.values.reserve(static_cast<std::size_t>(count));
  const double slope =
      (std::log(lambda_min) - std::log(lambda_max)) / static_cast<double>(count);
  for (int k = 1; k <= count; ++k) {
    grid.values.push_back(std::exp(std::log(lambda_max) + (k - 1) * slope));
  }
  return grid;
}

LambdaGrid geometric_grid(double lambda_max, int count) {
  if (!(lambda_max > 0.0)) {
    throw std::invalid_argument("geometric_grid: lambda_max must be positive");
  }
  if (count < 1) {
    throw std::invalid_argument("geometric_grid: count must be positive");
  }
  LambdaGrid grid;
  grid.scheme = GridScheme::geometric;
  grid.lambda_max = lambda_max;
  grid.count = count;
  grid.values.reserve(static_cast<std::size_t>(count));
  double value = lambda_max;
  for (int k = 1; k <= count; ++k) {
    value *= 0.618;
    grid.values.push_back(value);
  }
  return grid;
}

double bic(double rss, double df, Eigen::Index n) {
  if (rss < 0.0) throw std::invalid_argument("bic: negative rss");
  if (rss == 0.0) return -std::numeric_limits<double>::infinity();
  const double nn = static_cast<double>(n);
  return std::log(rss / nn) + df * std::log(nn) / nn;
}

double aic(double rss, double df, Eigen::Index n) {
  if (rss < 0.0) throw std::invalid_argument("aic: negative rss");
  if (rss == 0.0) return -std::numeric_limits<double>::infinity();
  const double nn = static_cast<double>(n);
  return std::log(rss / nn) + 2.0 * df / nn;
}

double aicc(double rss, double df, Eigen::Index n) {
  const double base = aic(rss, df, n);
  const double denom = static_cast<double>(n) - df - 1.0;
  if (denom <= 0.0) return std::numeric_limits<double>::infinity();
  return base + 2.0 * df * (df + 1.0) / denom;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::bic: return "bic";
    case Method::aic: return "aic";
    case Method::aicc: return "aicc";
    case Method::cv: return "cv";
  }
  return "unknown";
}

std::vector<int> cv_fold_assignment(Eigen::Index n, int k_folds,
                                    std::uint64_t seed) {
  if (k_folds < 2) throw std::invalid_argument("cv: need k_folds >= 2");
  if (static_cast<Eigen::Index>(k_folds) > n) {
    throw std::invalid_argument("cv: k_folds exceeds sample count");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(seed);
  for (Eigen::Index i = n - 1; i > 0; --i) {  // Fisher-Yates
    const auto j = static_cast<Eigen::Index>(
        rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(j)]);
  }
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    fold[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] =
        static_cast<int>(i % k_folds);
  }
  return fold;
}

SelectionReport cross_validate(const TraceDataset& data, const LambdaGrid& grid,
                               int k_folds, std::uint64_t seed, double gamma,
                               const SolverOptions& solver_opts,
                               const DofOptions& dof_opts) {
  if (grid.values.empty()) throw std::invalid_argument("cv: empty grid");
  const auto start = Clock::now();
  std::atomic<std::int64_t> invocations{0};

  const std::vector<int> fold_of = cv_fold_assignment(data.n, k_folds, seed);
  std::vector<std::vector<Eigen::Index>> train(static_cast<std::size_t>(k_folds));
  std::vector<std::vector<Eigen::Index>> valid(static_cast<std::size_t>(k_folds));
  for (Eigen::Index i = 0; i < data.n; ++i) {
    const auto f = static_cast<std::size_t>(fold_of[static_cast<std::size_t>(i)]);
    for (std::size_t g = 0; g < static_cast<std::size_t>(k_folds); ++g) {
      (g == f ? valid[g] : train[g]).push_back(i);
    }
  }
  for (int f = 0; f < k_folds; ++f) {
    if (train[static_cast<std::size_t>(f)].empty()) {
      throw std::runtime_error("cv: fold with zero training samples");
    }
  }

  // per-fold validation MSE curves, computed concurrently, reduced in fold
  // order so the result does not depend on scheduling
  const auto fold_scores = [&](int f) {
    SolverOptions opts = solver_opts;
    opts.invocation_counter = &invocations;
    opts.warm_start.reset();
    const TraceDataset train_data = subset(data, train[static_cast<std::size_t>(f)]);
    const TraceDataset valid_data = subset(data, valid[static_cast<std::size_t>(f)]);
    const WeightPair w = weights_for(train_data, gamma);
    const std::vector<FitResult> fits = solve_path(train_data, w, grid.values, opts);
    std::vector<double> scores(grid.values.size());
    for (std::size_t i = 0; i < fits.size(); ++i) {
      const Eigen::VectorXd err =
          valid_data.responses - valid_data.predict(fits[i].b_hat);
      scores[i] = err.squaredNorm() / static_cast<double>(valid_data.n);
    }
    return scores;
  };
  std::vector<std::future<std::vector<double>>> futures;
  futures.reserve(static_cast<std::size_t>(k_folds));
  for (int f = 0; f < k_folds; ++f) {
    futures.push_back(std::async(std::launch::async, fold_scores, f));
  }
  std::vector<double> score(grid.values.size(), 0.0);
  for (auto& fut : futures) {
    const std::vector<double> s = fut.get();
    for (std::size_t i = 0; i < score.size(); ++i) score[i] += s[i];
  }
  for (double& s : score) s /= static_cast<double>(k_folds);

  // full-data path: supplies the per-lambda fit columns and the refit at
  // the chosen lambda without an extra solve
  SolverOptions opts = solver_opts;
  opts.invocation_counter = &invocations;
  const WeightPair w = weights_for(data, gamma);
  const std::vector<FitResult> fits = solve_path(data, w, grid.values, opts);
  const DofContext dof_ctx(data, w, dof_opts);

  SelectionReport report;
  report.method = Method::cv;
  report.fold_count = k_folds;
  report.seed = seed;
  report.gamma = gamma;
  report.per_lambda.resize(grid.values.size());
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    PerLambda& row = report.per_lambda[i];
    row.lambda = grid.values[i];
    row.criterion_value = score[i];
    row.rank = fits[i].rank;
    row.rss = fits[i].residuals.squaredNorm();
    row.converged = fits[i].converged;
    if (!row.converged) report.any_failure = true;
    try {
      row.df = dof_ctx.estimate(fits[i], row.lambda).df;
    } catch (const std::exception&) {
      row.df = std::numeric_limits<double>::quiet_NaN();
      row.degenerate = true;
      report.any_failure = true;
    }
  }
  const std::size_t best = argmin_criterion(report.per_lambda);
  report.chosen_lambda = grid.values[best];
  report.chosen_rank = fits[best].rank;
  report.mse = fits[best].residuals.squaredNorm();
  report.mse_mean = report.mse / static_cast<double>(data.n);
  report.solver_invocations = invocations.load();
  report.wall_time_seconds = seconds_since(start);
  return report;
}

std::vector<SelectionReport> select_information_criteria(
    const TraceDataset& data, const LambdaGrid& grid,
    const std::vector<Method>& methods, const SelectOptions& opts) {
  if (grid.values.empty()) {
    throw std::invalid_argument("select: empty grid");
  }
  for (Method m : methods) {
    if (m == Method::cv) {
      throw std::invalid_argument("select_information_criteria: cv not allowed");
    }
  }
  const auto start = Clock::now();
  std::atomic<std::int64_t> invocations{0};
  SolverOptions solver_opts = opts.solver;
  solver_opts.invocation_counter = &invocations;

  const WeightPair w = weights_for(data, opts.gamma);
  const std::vector<FitResult> fits = solve_path(data, w, grid.values, solver_opts);
  const DofContext dof_ctx(data, w, opts.dof);

  std::vector<PerLambda> shared(grid.values.size());
  bool any_failure = false;
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    PerLambda& row = shared[i];
    row.lambda = grid.values[i];
    row.rank = fits[i].rank;
    row.rss = fits[i].residuals.squaredNorm();
    row.converged = fits[i].converged;
    if (!row.converged) any_failure = true;
    try {
      row.df = dof_ctx.estimate(fits[i], row.lambda).df;
    } catch (const std::exception&) {
      row.df = std::numeric_limits<double>::quiet_NaN();
      row.degenerate = true;
      any_failure = true;
    }
  }
  const double elapsed = seconds_since(start);
  const std::int64_t solve_count = invocations.load();

  std::vector<SelectionReport> reports;
  reports.reserve(methods.size());
  for (Method m : methods) {
    SelectionReport report;
    report.method = m;
    report.gamma = opts.gamma;
    report.per_lambda = shared;
    report.any_failure = any_failure;
    for (PerLambda& row : report.per_lambda) {
      if (std::isnan(row.df)) {
        row.degenerate = true;
        row.criterion_value = std::numeric_limits<double>::infinity();
        continue;
      }
      row.criterion_value = criterion_value(m, row.rss, row.df, data.n);
      if (row.rss == 0.0) row.degenerate = true;  // log(0) guard
    }
    const std::size_t best = argmin_criterion(report.per_lambda);
    report.chosen_lambda = grid.values[best];
    report.chosen_rank = fits[best].rank;
    report.mse = fits[best].residuals.squaredNorm();
    report.mse_mean = report.mse / static_cast<double>(data.n);
    report.solver_invocations = solve_count;
    report.wall_time_seconds = elapsed;
    reports.push_back(std::move(report));
  }
  return reports;
}

SelectionReport select_model(const TraceDataset& data, const LambdaGrid& grid,
                             Method method, const SelectOptions& opts) {
  if (method == Method::cv) {
    return cross_validate(data, grid, opts.k_folds, opts.seed, opts.gamma,
                          opts.solver, opts.dof);
  }
  return select_information_criteria(data, grid, {method}, opts).front();
}

}  // namespace antrace
