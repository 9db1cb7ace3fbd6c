#ifndef ANTRACE_SPECTRAL_JACOBIAN_HPP
#define ANTRACE_SPECTRAL_JACOBIAN_HPP

#include <Eigen/Dense>

#include "antrace/linalg.hpp"

namespace antrace {

/// Exact Jacobian of the polar factor U V^T of a rank-r matrix along its
/// fixed-rank manifold, as a p1p2 x p1p2 operator on vec(dC):
///   dG = (I-UU^T) dC V diag(b)^{-1} V^T + U diag(b)^{-1} U^T dC (I-VV^T)
///        + U A V^T,   A_ij = (H_ij - H_ji)/(b_i + b_j),  H = U^T dC V.
/// Symmetric positive semidefinite. Rank 0 yields the zero matrix.
Eigen::MatrixXd polar_term(const TruncatedSvd& weighted_svd, Eigen::Index p1,
                           Eigen::Index p2);

/// The non-polar pieces of the fixed-rank stationarity Jacobian: three Gram
/// sandwiches with P = (I-VV^T) ox (I-UU^T) that confine the system to the
/// tangent space, and two terms coupling the scaled complement block
/// S (= lambda N at a stationary point) to the basis rotation through the
/// vec-transpose permutation and the pseudo-inverse Q of the decomposed
/// matrix:
///   -(P G + G P - P G P) - (S^T ox Q^T) K_{p1,p2} - (Q ox S) K_{p1,p2}.
Eigen::MatrixXd complement_term_parts(const Eigen::MatrixXd& gram,
                                      const TruncatedSvd& svd,
                                      const Eigen::MatrixXd& scaled_complement,
                                      Eigen::Index p1, Eigen::Index p2);

/// (I-UU^T) M (I-VV^T) for the svd's subspaces.
Eigen::MatrixXd complement_block(const TruncatedSvd& svd,
                                 const Eigen::MatrixXd& m);

}  // namespace antrace

#endif
