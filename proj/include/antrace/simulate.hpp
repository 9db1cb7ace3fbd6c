#ifndef ANTRACE_SIMULATE_HPP
#define ANTRACE_SIMULATE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "antrace/criteria.hpp"
#include "antrace/dataset.hpp"

namespace antrace {

struct SimulationConfig {
  Eigen::Index p1 = 8;
  Eigen::Index p2 = 10;
  Eigen::Index n = 200;
  int true_rank = 2;
  double noise_std = 0.1;
  std::uint64_t seed = 0;
  int replicates = 1;
  GridScheme grid_scheme = GridScheme::geometric;
  int grid_count = 20;
  double lambda_min_ratio = 1e-4;  // log scheme: lambda_min = ratio * lambda_max
  double gamma = 1.0;
  SolverOptions solver;
};

struct GroundTruth {
  Eigen::MatrixXd b_star;
  int r_star = 0;
};

/// Rank-one-predictor synthetic data: X_i = P_i Q_i^T with standard normal
/// P_i, Q_i; B* is a sum of true_rank standard normal outer products;
/// y_i = <X_i, B*> + noise. Fully determined by cfg.seed. Draw order:
/// B* columns (u_j then v_j per rank), then P_i, Q_i, eps_i per sample.
std::pair<TraceDataset, GroundTruth> generate_dataset(const SimulationConfig& cfg);

struct EvalRecord {
  bool rank_correct = false;
  int rank_error = 0;  // |chosen - r*|
  double mse = 0.0;
  double time_seconds = 0.0;
};

EvalRecord evaluate_selection(const SelectionReport& report,
                              const GroundTruth& truth);

struct StudyRow {
  std::string method;
  double lambda_star = 0.0;      // mean over replicates
  double mse = 0.0;              // mean over replicates
  double rank = 0.0;             // mean selected rank
  double time_seconds = 0.0;     // mean wall time
  double rank_recovery_rate = 0.0;
};

struct ReplicateOutcome {
  int replicate = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::vector<std::string> methods;
  std::vector<double> lambda_star, mse, time_seconds;
  std::vector<Eigen::Index> rank;
};

struct StudyTable {
  SimulationConfig config;
  std::vector<StudyRow> rows;                 // one per method
  std::vector<ReplicateOutcome> replicates;   // per-replicate detail
};

/// Runs BIC, AIC, AICc, 5-fold CV and 10-fold CV on every replicate and
/// aggregates per-method rows plus the rank-recovery frequency. Replicate
/// failures are recorded and the study continues.
StudyTable replicate_study(const SimulationConfig& cfg);

/// CSV of the aggregate rows
/// (method, lambda_star, mse, rank, time_seconds, rank_recovery_rate).
std::string study_csv(const StudyTable& table);

}  // namespace antrace

#endif
