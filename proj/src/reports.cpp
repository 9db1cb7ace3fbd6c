#include "antrace/reports.hpp"

#include <fstream>
#include <stdexcept>

namespace antrace {

namespace {

// JSON has no infinities; the criterion sentinels become signed sentinels
// the reader can recognize.
Json finite_or_string(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Json to_json(const FitResult& fit) {
  Json j;
  j["lambda"] = fit.lambda;
  j["rank"] = fit.rank;
  j["objective"] = fit.objective;
  j["optimality_residual"] = fit.optimality_residual;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["rss"] = fit.residuals.squaredNorm();
  j["b_hat"] = matrix_json(fit.b_hat);
  j["weighted_singular_values"] = Json::array();
  for (Eigen::Index i = 0; i < fit.weighted_svd.rank(); ++i) {
    j["weighted_singular_values"].push_back(fit.weighted_svd.singular_values(i));
  }
  return j;
}

Json to_json(const DofEstimate& est) {
  Json j;
  j["df"] = est.df;
  j["m_r_rank"] = est.m_r_rank;
  j["m_r_symmetric"] = est.m_r_symmetric;
  j["branch"] = est.branch == DofEstimate::Branch::full_rank_inverse
                    ? "full_rank_inverse"
                    : "pseudo_inverse";
  j["gram_rank"] = est.gram_rank;
  j["condition_estimate"] = finite_or_string(est.condition_estimate);
  j["min_singular_gap"] = finite_or_string(est.min_singular_gap);
  j["close_singular_values"] = est.close_singular_values;
  return j;
}

Json to_json(const SelectionReport& report) {
  Json j;
  j["method"] = method_name(report.method);
  j["chosen_lambda"] = report.chosen_lambda;
  j["chosen_rank"] = report.chosen_rank;
  j["mse"] = report.mse;
  j["mse_mean"] = report.mse_mean;
  if (report.fold_count.has_value()) j["fold_count"] = *report.fold_count;
  if (report.seed.has_value()) j["seed"] = *report.seed;
  j["gamma"] = report.gamma;
  j["solver_invocations"] = report.solver_invocations;
  j["any_failure"] = report.any_failure;
  Json rows = Json::array();
  for (const PerLambda& row : report.per_lambda) {
    Json r;
    r["lambda"] = row.lambda;
    r["criterion_value"] = finite_or_string(row.criterion_value);
    r["df"] = finite_or_string(row.df);
    r["rank"] = row.rank;
    r["rss"] = row.rss;
    r["converged"] = row.converged;
    r["degenerate"] = row.degenerate;
    rows.push_back(std::move(r));
  }
  j["per_lambda"] = std::move(rows);
  return j;
}

Json to_json(const StudyTable& table) {
  Json j;
  Json rows = Json::array();
  for (const StudyRow& row : table.rows) {
    Json r;
    r["method"] = row.method;
    r["lambda_star"] = row.lambda_star;
    r["mse"] = row.mse;
    r["rank"] = row.rank;
    r["time_seconds"] = row.time_seconds;
    r["rank_recovery_rate"] = row.rank_recovery_rate;
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  Json reps = Json::array();
  for (const ReplicateOutcome& rep : table.replicates) {
    Json r;
    r["replicate"] = rep.replicate;
    r["seed"] = rep.seed;
    r["failed"] = rep.failed;
    if (rep.failed) {
      r["error"] = rep.error;
    } else {
      Json per = Json::array();
      for (std::size_t m = 0; m < rep.methods.size(); ++m) {
        Json e;
        e["method"] = rep.methods[m];
        e["lambda_star"] = rep.lambda_star[m];
        e["mse"] = rep.mse[m];
        e["rank"] = rep.rank[m];
        per.push_back(std::move(e));
      }
      r["methods"] = std::move(per);
    }
    reps.push_back(std::move(r));
  }
  j["replicates"] = std::move(reps);
  return j;
}

void write_report(const Json& payload, const Json& effective_config,
                  const std::string& path) {
  Json j;
  j["version"] = kVersion;
  j["config"] = effective_config;
  j["report"] = payload;
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write report: " + path);
  }
  out << j.dump(2) << '\n';
}

}  // namespace antrace
