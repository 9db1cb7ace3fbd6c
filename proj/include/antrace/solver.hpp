#ifndef ANTRACE_SOLVER_HPP
#define ANTRACE_SOLVER_HPP

#include <atomic>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "antrace/dataset.hpp"
#include "antrace/linalg.hpp"
#include "antrace/weights.hpp"

namespace antrace {

struct SolverOptions {
  int max_iterations = 20000;
  double kkt_tolerance = 1e-7;
  double svd_rel_tol = kRankRelTol;
  std::optional<Eigen::MatrixXd> warm_start;  // in the original B coordinates
  // Incremented once per solve; used to audit how many fits a selection
  // method actually pays for.
  std::atomic<std::int64_t>* invocation_counter = nullptr;
};

struct FitResult {
  double lambda = 0.0;
  Eigen::MatrixXd b_hat;
  TruncatedSvd weighted_svd;  // of W1 * b_hat * W2
  Eigen::Index rank = 0;
  Eigen::VectorXd residuals;  // y_i - <X_i, b_hat>
  double objective = 0.0;     // (1/2n)||residuals||^2 + lambda ||W1 b W2||_*
  double optimality_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Proximal operator of tau * ||.||_*: soft-thresholds the singular values.
Eigen::MatrixXd svt_prox(const Eigen::MatrixXd& m, double tau);

/// Minimizes (1/2n) sum (y_i - <X_i,B>)^2 + lambda ||W1 B W2||_*.
///
/// Works on the change of variables C = W1 B W2 (valid because W1 and W2
/// are symmetric positive definite), runs accelerated proximal gradient
/// with constant step 1/L and adaptive restart, and certifies the result
/// through the stationarity condition (see optimality_residual). lambda = 0
/// delegates to the least-squares fit. Non-convergence returns the best
/// iterate flagged via `converged = false`.
FitResult solve(const TraceDataset& data, const WeightPair& w, double lambda,
                const SolverOptions& opts = {});

/// Warm-started fits over a grid, processed in decreasing-lambda order;
/// results are returned in the input grid order.
std::vector<FitResult> solve_path(const TraceDataset& data, const WeightPair& w,
                                  const std::vector<double>& grid,
                                  const SolverOptions& opts = {});

/// Violation of the stationarity condition at B for the given lambda > 0.
///
/// With G = (1/(n lambda)) W1^{-1} (sum residual_i X_i) W2^{-1} and the
/// weighted SVD W1 B W2 = U diag(b) V^T, measures
///   ||U^T G V - I||_F  +  max(sigma_1((I-UU^T) G (I-VV^T)) - 1, 0)
///   +  || off-block couplings ||_F,
/// which is zero exactly when B satisfies the first-order condition.
double optimality_residual(const TraceDataset& data, const WeightPair& w,
                           double lambda, const Eigen::MatrixXd& b,
                           double svd_rel_tol = kRankRelTol);

/// Smallest lambda for which the zero matrix is optimal:
/// || W1^{-1} ((1/n) sum y_i X_i) W2^{-1} ||_2. Returns 0 for all-zero
/// responses.
double lambda_max(const TraceDataset& data, const WeightPair& w);

}  // namespace antrace

#endif
