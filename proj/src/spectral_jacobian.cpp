#include "antrace/spectral_jacobian.hpp"

namespace antrace {

Eigen::MatrixXd polar_term(const TruncatedSvd& svd, Eigen::Index p1,
                           Eigen::Index p2) {
  const Eigen::Index p = p1 * p2;
  const Eigen::Index r = svd.rank();
  if (r == 0) {
    return Eigen::MatrixXd::Zero(p, p);
  }
  const Eigen::MatrixXd& u = svd.left;
  const Eigen::MatrixXd& v = svd.right;
  const Eigen::VectorXd& b = svd.singular_values;
  const Eigen::MatrixXd pu = Eigen::MatrixXd::Identity(p1, p1) - u * u.transpose();
  const Eigen::MatrixXd pv = Eigen::MatrixXd::Identity(p2, p2) - v * v.transpose();

  Eigen::MatrixXd out =
      kronecker(v * b.cwiseInverse().asDiagonal() * v.transpose(), pu);
  out += kronecker(pv, u * b.cwiseInverse().asDiagonal() * u.transpose());

  // core block: H -> (H - H^T)_{ij} / (b_i + b_j) on the U-V coordinates,
  // assembled as kron(V,U) S kron(V,U)^T with the r^2 x r^2 coupling S
  Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(r * r, r * r);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) {
      const double inv = 1.0 / (b(i) + b(j));
      coupling(i + r * j, i + r * j) += inv;
      coupling(i + r * j, j + r * i) -= inv;
    }
  }
  const Eigen::MatrixXd basis = kronecker(v, u);  // p x r^2
  out += basis * coupling * basis.transpose();
  return out;
}

Eigen::MatrixXd complement_term_parts(const Eigen::MatrixXd& gram,
                                      const TruncatedSvd& svd,
                                      const Eigen::MatrixXd& scaled_complement,
                                      Eigen::Index p1, Eigen::Index p2) {
  const Eigen::Index p = p1 * p2;
  if (svd.rank() == 0) {
    return Eigen::MatrixXd::Zero(p, p);
  }
  const Eigen::MatrixXd pu =
      Eigen::MatrixXd::Identity(p1, p1) - svd.left * svd.left.transpose();
  const Eigen::MatrixXd pv =
      Eigen::MatrixXd::Identity(p2, p2) - svd.right * svd.right.transpose();
  const Eigen::MatrixXd p_perp = kronecker(pv, pu);

  // -(P G + G P - P G P): confines the Gram to the fixed-rank tangent space.
  const Eigen::MatrixXd pg = p_perp * gram;
  Eigen::MatrixXd out = -pg - pg.transpose() + pg * p_perp;

  // complement-to-rotation coupling through the vec-transpose permutation
  const Eigen::MatrixXd q = svd.right *
                            svd.singular_values.cwiseInverse().asDiagonal() *
                            svd.left.transpose();
  out -= commutation_apply_cols(
      p1, p2, kronecker(scaled_complement.transpose(), q.transpose()));
  out -= commutation_apply_cols(p1, p2, kronecker(q, scaled_complement));
  return out;
}

Eigen::MatrixXd complement_block(const TruncatedSvd& svd,
                                 const Eigen::MatrixXd& m) {
  if (svd.rank() == 0) {
    return m;
  }
  Eigen::MatrixXd out = m - svd.left * (svd.left.transpose() * m);
  out -= (out * svd.right) * svd.right.transpose();
  return out;
}

}  // namespace antrace
