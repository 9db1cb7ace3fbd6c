#include "antrace/linalg.hpp"

#include <stdexcept>

#include <Eigen/SVD>

namespace antrace {

namespace {

constexpr Eigen::Index kMaxDenseEntries = 100'000'000;  // size-limit guard
constexpr Eigen::Index kMaxCommutationDim = 10'000;

// Thin SVD; Jacobi for small problems, divide-and-conquer above.
void thin_svd(const Eigen::MatrixXd& m, Eigen::MatrixXd& u, Eigen::VectorXd& s,
              Eigen::MatrixXd& v) {
  if (m.rows() <= 32 && m.cols() <= 32) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    s = svd.singularValues();
    v = svd.matrixV();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    s = svd.singularValues();
    v = svd.matrixV();
  }
}

}  // namespace

Eigen::VectorXd vectorize(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

Eigen::MatrixXd devectorize(const Eigen::VectorXd& v, Eigen::Index rows,
                            Eigen::Index cols) {
  if (v.size() != rows * cols) {
    throw std::invalid_argument("devectorize: length does not match shape");
  }
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::Index rows = a.rows() * b.rows();
  const Eigen::Index cols = a.cols() * b.cols();
  if (a.rows() != 0 && b.rows() != 0 &&
      (rows / b.rows() != a.rows() || cols / b.cols() != a.cols() ||
       rows > kMaxDenseEntries / std::max<Eigen::Index>(cols, 1))) {
    throw std::length_error("kronecker: product shape exceeds dense size limit");
  }
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::MatrixXd commutation_matrix(Eigen::Index m, Eigen::Index n) {
  if (m <= 0 || n <= 0) {
    throw std::invalid_argument("commutation_matrix: dimensions must be positive");
  }
  if (m * n > kMaxCommutationDim) {
    throw std::length_error(
        "commutation_matrix: dimension above the materialization cap; use "
        "commutation_apply instead");
  }
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m * n, m * n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k(j + n * i, i + m * j) = 1.0;
    }
  }
  return k;
}

Eigen::VectorXd commutation_apply(Eigen::Index m, Eigen::Index n,
                                  const Eigen::VectorXd& v) {
  if (v.size() != m * n) {
    throw std::invalid_argument("commutation_apply: length mismatch");
  }
  Eigen::VectorXd out(m * n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out(j + n * i) = v(i + m * j);
    }
  }
  return out;
}

Eigen::MatrixXd commutation_apply_rows(Eigen::Index m, Eigen::Index n,
                                       const Eigen::MatrixXd& a) {
  if (a.rows() != m * n) {
    throw std::invalid_argument("commutation_apply_rows: row count mismatch");
  }
  Eigen::MatrixXd out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.row(j + n * i) = a.row(i + m * j);
    }
  }
  return out;
}

Eigen::MatrixXd commutation_apply_cols(Eigen::Index m, Eigen::Index n,
                                       const Eigen::MatrixXd& a) {
  if (a.cols() != m * n) {
    throw std::invalid_argument("commutation_apply_cols: column count mismatch");
  }
  // (A K)(:, i + m j) = A(:, j + n i) because K's column (i + m j) selects
  // vec-transpose source index (j + n i).
  Eigen::MatrixXd out(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.col(i + m * j) = a.col(j + n * i);
    }
  }
  return out;
}

Eigen::MatrixXd TruncatedSvd::reconstruct() const {
  if (rank() == 0) {
    return Eigen::MatrixXd::Zero(left.rows(), right.rows());
  }
  return left * singular_values.asDiagonal() * right.transpose();
}

TruncatedSvd truncated_svd(const Eigen::MatrixXd& m, double rel_tol) {
  if (rel_tol < 0.0 || rel_tol >= 1.0) {
    throw std::invalid_argument("truncated_svd: rel_tol must be in [0, 1)");
  }
  Eigen::MatrixXd u, v;
  Eigen::VectorXd s;
  thin_svd(m, u, s, v);

  const double sigma1 = s.size() > 0 ? s(0) : 0.0;
  const double cutoff = rel_tol * sigma1;
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cutoff && s(r) > 0.0) ++r;

  TruncatedSvd out;
  out.left = u.leftCols(r);
  out.singular_values = s.head(r);
  out.right = v.leftCols(r);
  out.tolerance_used = cutoff;
  return out;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double rel_tol) {
  TruncatedSvd svd = truncated_svd(m, rel_tol);
  if (svd.rank() == 0) {
    return Eigen::MatrixXd::Zero(m.cols(), m.rows());
  }
  return svd.right * svd.singular_values.cwiseInverse().asDiagonal() *
         svd.left.transpose();
}

Eigen::Index numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  return truncated_svd(m, rel_tol).rank();
}

}  // namespace antrace
