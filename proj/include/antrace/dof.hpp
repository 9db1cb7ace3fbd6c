#ifndef ANTRACE_DOF_HPP
#define ANTRACE_DOF_HPP

#include <Eigen/Dense>

#include "antrace/dataset.hpp"
#include "antrace/linalg.hpp"
#include "antrace/solver.hpp"
#include "antrace/spectral_jacobian.hpp"
#include "antrace/weights.hpp"

namespace antrace {

struct DofOptions {
  Eigen::Index max_dense_dim = 2500;  // cap on p1*p2 for dense assembly
  double pinv_rel_tol = 1e-10;        // truncation for the sensitivity pinv
  double rank_rel_tol = kRankRelTol;  // rank inference everywhere else
};

struct DofEstimate {
  double df = 0.0;
  Eigen::Index m_r_rank = 0;       // numerical rank of the sensitivity matrix
  bool m_r_symmetric = true;       // relative asymmetry within 1e-8
  enum class Branch { full_rank_inverse, pseudo_inverse } branch =
      Branch::pseudo_inverse;
  Eigen::Index gram_rank = 0;      // rank of the design second-moment matrix
  double condition_estimate = 1.0; // largest/smallest retained singular value
  double min_singular_gap = 0.0;   // closest gap in the retained weighted
                                   // spectrum, relative to sigma_1
  bool close_singular_values = false;  // gap below 1e-6: the sensitivity
                                       // system is near a spectral crossing
};

/// Pieces of the fitted-value sensitivity system at one (lambda, fit).
///
/// Everything lives in the transformed coordinates C = W1 B W2 of the
/// solver's change of variables, where the penalty is the plain nuclear
/// norm. The fitted values are identical in either coordinate system, so
/// the divergence sum_k d yhat_k / d y_k can be computed here directly.
struct DofWorkspace {
  Eigen::MatrixXd gram;        // (1/n) X~^T X~, transformed design second moment
  Eigen::MatrixXd polar;       // Jacobian of the polar factor U V^T
  Eigen::MatrixXd complement;  // rank-manifold and residual coupling terms
  Eigen::MatrixXd e_lambda;    // (1/n) sum residual_i X_i, original coordinates
  Eigen::MatrixXd weighted_pinv;  // (W1 b_hat W2)^+ = V diag(b)^{-1} U^T
};

/// E = (1/n) sum residual_i X_i.
Eigen::MatrixXd residual_matrix(const TraceDataset& data, const FitResult& fit);

/// The remaining sensitivity terms: three Gram sandwiches with the
/// projectors (I-UU^T), (I-VV^T) that confine the system to the fixed-rank
/// tangent space, and two terms coupling the residual matrix to the basis
/// rotation through the commutation permutation and (W1 b_hat W2)^+:
///   -(P G + G P - P G P) - (S^T ox Q^T) K - (Q ox S) K,
/// with P = (I-VV^T) ox (I-UU^T), G the transformed Gram, Q = (W1 b W2)^+,
/// S = (I-UU^T) W1^{-1} E W2^{-1} (I-VV^T) and K = K_{p1,p2}. All five
/// terms carry leading minus signs. Rank-0 fits yield the zero matrix (the
/// endpoint is handled by the rank short-circuit in degrees_of_freedom).
Eigen::MatrixXd complement_term(const TraceDataset& data, const WeightPair& w,
                                const FitResult& fit, double lambda,
                                const DofOptions& opts = {});

/// gram + lambda * polar + complement. (The complement already carries its
/// own lambda scaling internally through S.)
Eigen::MatrixXd sensitivity_matrix(const DofWorkspace& ws, double lambda);

/// Reusable per-dataset state for repeated estimates along a lambda path:
/// the transformed design, its second moment, and its rank.
class DofContext {
 public:
  DofContext(const TraceDataset& data, const WeightPair& w,
             DofOptions opts = {});

  const Eigen::MatrixXd& gram() const { return gram_; }
  Eigen::Index gram_rank() const { return gram_rank_; }

  DofEstimate estimate(const FitResult& fit, double lambda) const;
  DofWorkspace workspace(const FitResult& fit) const;

 private:
  const TraceDataset* data_;
  const WeightPair* w_;
  DofOptions opts_;
  Eigen::MatrixXd design_t_;  // rows vec(W1^{-1} X_i W2^{-1})^T
  Eigen::MatrixXd gram_;
  Eigen::Index gram_rank_ = 0;
};

/// Unbiased estimate of the degrees of freedom sum_k d yhat_k / d y_k of
/// the fit at this lambda:
///   df = (1/n) sum_k vec(X~_k)^T M^+ vec(X~_k) = trace(M^+ gram),
/// where M = gram + lambda*polar + complement is the sensitivity system of
/// the stationarity condition on the fixed-rank manifold. lambda = 0 and
/// rank-0 fits short-circuit to df = rank(gram). Requires a converged fit.
DofEstimate degrees_of_freedom(const TraceDataset& data, const WeightPair& w,
                               const FitResult& fit, double lambda,
                               const DofOptions& opts = {});

}  // namespace antrace

#endif
