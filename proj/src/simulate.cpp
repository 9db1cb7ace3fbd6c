#include "antrace/simulate.hpp"

#include <cmath>
#include <future>
#include <sstream>
#include <stdexcept>

#include "antrace/linalg.hpp"
#include "antrace/rng.hpp"
#include "antrace/solver.hpp"
#include "antrace/weights.hpp"

namespace antrace {

namespace {

LambdaGrid grid_for(const TraceDataset& data, const WeightPair& w,
                    const SimulationConfig& cfg) {
  const double lmax = lambda_max(data, w);
  if (!(lmax > 0.0)) {
    throw std::runtime_error("simulate: lambda_max is zero (all-zero responses?)");
  }
  if (cfg.grid_scheme == GridScheme::geometric) {
    return geometric_grid(lmax, cfg.grid_count);
  }
  return log_grid(lmax, cfg.lambda_min_ratio * lmax, cfg.grid_count);
}

ReplicateOutcome run_replicate(const SimulationConfig& cfg, int index) {
  ReplicateOutcome out;
  out.replicate = index;
  out.seed = Rng::derive_stream(cfg.seed, static_cast<std::uint64_t>(index));
  try {
    SimulationConfig rep_cfg = cfg;
    rep_cfg.seed = out.seed;
    auto [data, truth] = generate_dataset(rep_cfg);

    const WeightPair w = build_weights(fit_least_squares(data), data.n, cfg.gamma);
    const LambdaGrid grid = grid_for(data, w, cfg);

    SelectOptions opts;
    opts.gamma = cfg.gamma;
    opts.solver = cfg.solver;

    const std::vector<SelectionReport> ic = select_information_criteria(
        data, grid, {Method::bic, Method::aic, Method::aicc}, opts);

    std::vector<SelectionReport> all(ic.begin(), ic.end());
    for (int folds : {5, 10}) {
      all.push_back(cross_validate(
          data, grid, folds,
          Rng::derive_stream(out.seed, static_cast<std::uint64_t>(folds)),
          cfg.gamma, cfg.solver));
    }

    for (const SelectionReport& report : all) {
      const EvalRecord eval = evaluate_selection(report, truth);
      std::string name = method_name(report.method);
      if (report.fold_count.has_value()) {
        name = std::to_string(*report.fold_count) + "-fold cv";
      }
      out.methods.push_back(name);
      out.lambda_star.push_back(report.chosen_lambda);
      out.mse.push_back(eval.mse);
      out.time_seconds.push_back(report.wall_time_seconds);
      out.rank.push_back(report.chosen_rank);
    }
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

}  // namespace

std::pair<TraceDataset, GroundTruth> generate_dataset(const SimulationConfig& cfg) {
  if (cfg.p1 < 1 || cfg.p2 < 1 || cfg.n < 1) {
    throw std::invalid_argument("generate: dimensions must be positive");
  }
  if (cfg.true_rank < 1 || cfg.true_rank > std::min(cfg.p1, cfg.p2)) {
    throw std::invalid_argument("generate: true_rank must be in [1, min(p1,p2)]");
  }
  if (!(cfg.noise_std > 0.0) && cfg.noise_std != 0.0) {
    throw std::invalid_argument("generate: noise_std must be nonnegative");
  }
  Rng rng(cfg.seed);

  // draw order is part of the reproducibility contract:
  // B* factors first (u_j then v_j per rank), then P_i, Q_i, eps_i per sample
  Eigen::MatrixXd b_star = Eigen::MatrixXd::Zero(cfg.p1, cfg.p2);
  for (int j = 0; j < cfg.true_rank; ++j) {
    Eigen::VectorXd u(cfg.p1), v(cfg.p2);
    for (Eigen::Index i = 0; i < cfg.p1; ++i) u(i) = rng.normal();
    for (Eigen::Index i = 0; i < cfg.p2; ++i) v(i) = rng.normal();
    b_star += u * v.transpose();
  }

  std::vector<Eigen::MatrixXd> predictors;
  predictors.reserve(static_cast<std::size_t>(cfg.n));
  Eigen::VectorXd responses(cfg.n);
  for (Eigen::Index i = 0; i < cfg.n; ++i) {
    Eigen::VectorXd p(cfg.p1), q(cfg.p2);
    for (Eigen::Index k = 0; k < cfg.p1; ++k) p(k) = rng.normal();
    for (Eigen::Index k = 0; k < cfg.p2; ++k) q(k) = rng.normal();
    predictors.push_back(p * q.transpose());
    responses(i) = p.dot(b_star * q) + cfg.noise_std * rng.normal();
  }

  GroundTruth truth;
  truth.b_star = b_star;
  truth.r_star = cfg.true_rank;
  if (numerical_rank(b_star) != cfg.true_rank) {
    throw std::runtime_error("generate: drawn B* is rank deficient; reseed");
  }
  return {make_dataset(std::move(predictors), std::move(responses)), truth};
}

EvalRecord evaluate_selection(const SelectionReport& report,
                              const GroundTruth& truth) {
  EvalRecord rec;
  rec.rank_correct = report.chosen_rank == truth.r_star;
  rec.rank_error = static_cast<int>(
      std::llabs(static_cast<long long>(report.chosen_rank) - truth.r_star));
  rec.mse = report.mse;
  rec.time_seconds = report.wall_time_seconds;
  return rec;
}

StudyTable replicate_study(const SimulationConfig& cfg) {
  if (cfg.replicates < 1) {
    throw std::invalid_argument("replicate_study: need at least one replicate");
  }
  StudyTable table;
  table.config = cfg;
  table.replicates.resize(static_cast<std::size_t>(cfg.replicates));

  const unsigned workers =
      std::max(1u, std::min(std::thread::hardware_concurrency(),
                            static_cast<unsigned>(cfg.replicates)));
  std::atomic<int> next{0};
  std::vector<std::future<void>> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) {
    pool.push_back(std::async(std::launch::async, [&] {
      for (int i = next.fetch_add(1); i < cfg.replicates; i = next.fetch_add(1)) {
        table.replicates[static_cast<std::size_t>(i)] = run_replicate(cfg, i);
      }
    }));
  }
  for (auto& f : pool) f.get();

  // ordered reduction over replicates, one aggregate row per method
  std::vector<std::string> method_order;
  for (const ReplicateOutcome& rep : table.replicates) {
    if (!rep.failed) {
      method_order = rep.methods;
      break;
    }
  }
  for (std::size_t m = 0; m < method_order.size(); ++m) {
    StudyRow row;
    row.method = method_order[m];
    int used = 0;
    for (const ReplicateOutcome& rep : table.replicates) {
      if (rep.failed) continue;
      row.lambda_star += rep.lambda_star[m];
      row.mse += rep.mse[m];
      row.rank += static_cast<double>(rep.rank[m]);
      row.time_seconds += rep.time_seconds[m];
      row.rank_recovery_rate +=
          rep.rank[m] == table.config.true_rank ? 1.0 : 0.0;
      ++used;
    }
    if (used > 0) {
      row.lambda_star /= used;
      row.mse /= used;
      row.rank /= used;
      row.time_seconds /= used;
      row.rank_recovery_rate /= used;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string study_csv(const StudyTable& table) {
  std::ostringstream os;
  os.precision(17);
  os << "method,lambda_star,mse,rank,time_seconds,rank_recovery_rate\n";
  for (const StudyRow& row : table.rows) {
    os << row.method << ',' << row.lambda_star << ',' << row.mse << ','
       << row.rank << ',' << row.time_seconds << ','
       << row.rank_recovery_rate << '\n';
  }
  return os.str();
}

}  // namespace antrace
