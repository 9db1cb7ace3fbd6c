#ifndef ANTRACE_WEIGHTS_HPP
#define ANTRACE_WEIGHTS_HPP

#include <Eigen/Dense>

#include "antrace/dataset.hpp"

namespace antrace {

/// Symmetric positive definite weight matrices built from the spectrum of
/// the least-squares fit, together with their inverses. The penalty
/// ||W1 B W2||_* shrinks directions the least-squares fit found weak.
struct WeightPair {
  Eigen::MatrixXd w1, w2;          // p1 x p1, p2 x p2
  Eigen::MatrixXd w1_inv, w2_inv;
  double gamma = 1.0;
  Eigen::VectorXd padded_spectrum_1;  // length p1
  Eigen::VectorXd padded_spectrum_2;  // length p2

  static WeightPair identity(Eigen::Index p1, Eigen::Index p2);
};

/// Minimum-Frobenius-norm minimizer of (1/2n) sum (y_i - <X_i,B>)^2,
/// computed through the pseudo-inverse of the design Gram matrix.
Eigen::MatrixXd fit_least_squares(const TraceDataset& data);

/// Weight construction: the singular spectrum of b_ls is floored at
/// n^{-1/2}, padded with n^{-1/2} to full length on each side, and the
/// singular bases are completed to orthonormal bases of R^{p1} / R^{p2} by
/// deterministic Gram-Schmidt against the standard basis. Then
/// W = U diag(s)^{-gamma} U^T and its inverse uses exponent +gamma.
/// Requires gamma in (0, 1].
WeightPair build_weights(const Eigen::MatrixXd& b_ls, Eigen::Index n_samples,
                         double gamma);

/// Change of variables: predictors become W1^{-1} X_i W2^{-1} so that
/// <X~_i, C> = <X_i, B> whenever C = W1 B W2. Responses are unchanged.
TraceDataset transform_design(const TraceDataset& data, const WeightPair& w);

}  // namespace antrace

#endif
