#ifndef ANTRACE_LINALG_HPP
#define ANTRACE_LINALG_HPP

#include <Eigen/Dense>

namespace antrace {

/// Default relative tolerance for inferring a numerical rank from a
/// singular spectrum (relative to the largest singular value).
inline constexpr double kRankRelTol = 1e-8;

/// Column-major stacking of a matrix into a vector.
Eigen::VectorXd vectorize(const Eigen::MatrixXd& m);

/// Inverse of vectorize at a fixed shape.
Eigen::MatrixXd devectorize(const Eigen::VectorXd& v, Eigen::Index rows,
                            Eigen::Index cols);

/// Kronecker product. Throws std::length_error when the product shape
/// exceeds the dense size limit.
Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Permutation matrix K with K * vec(A) = vec(A^T) for every m x n matrix A.
/// Materialized form; throws std::length_error for m*n > 10^4 (use the
/// apply variants above that size).
Eigen::MatrixXd commutation_matrix(Eigen::Index m, Eigen::Index n);

/// K_{m,n} * v without materializing K.
Eigen::VectorXd commutation_apply(Eigen::Index m, Eigen::Index n,
                                  const Eigen::VectorXd& v);

/// K_{m,n} * A (row permutation of A) without materializing K.
Eigen::MatrixXd commutation_apply_rows(Eigen::Index m, Eigen::Index n,
                                       const Eigen::MatrixXd& a);

/// A * K_{m,n} (column permutation of A) without materializing K.
Eigen::MatrixXd commutation_apply_cols(Eigen::Index m, Eigen::Index n,
                                       const Eigen::MatrixXd& a);

/// Rank-revealing SVD truncated at a relative spectral threshold.
struct TruncatedSvd {
  Eigen::MatrixXd left;              // p1 x r, orthonormal columns
  Eigen::VectorXd singular_values;   // r, strictly positive, nonincreasing
  Eigen::MatrixXd right;             // p2 x r, orthonormal columns
  double tolerance_used = 0.0;       // absolute cutoff applied

  Eigen::Index rank() const { return singular_values.size(); }
  Eigen::MatrixXd reconstruct() const;
};

/// Keeps exactly the singular triplets with sigma_i > rel_tol * sigma_1.
/// An all-zero input yields rank 0 with empty factors.
TruncatedSvd truncated_svd(const Eigen::MatrixXd& m, double rel_tol = kRankRelTol);

/// Moore-Penrose pseudo-inverse via SVD with singular values
/// <= rel_tol * sigma_1 zeroed.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double rel_tol = kRankRelTol);

/// Numerical rank at a relative threshold.
Eigen::Index numerical_rank(const Eigen::MatrixXd& m, double rel_tol = kRankRelTol);

}  // namespace antrace

#endif
