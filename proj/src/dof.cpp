#include "antrace/dof.hpp"

#include "antrace/spectral_jacobian.hpp"

#include <cmath>
#include <stdexcept>

namespace antrace {

namespace {

constexpr double kSymmetryTol = 1e-8;
constexpr double kCloseSpectrumTol = 1e-6;

void check_dense_cap(Eigen::Index p, Eigen::Index cap) {
  if (p > cap) {
    throw std::length_error(
        "dof: p1*p2 exceeds the dense assembly cap (configurable via "
        "DofOptions::max_dense_dim)");
  }
}

Eigen::MatrixXd transformed_design(const TraceDataset& data, const WeightPair& w) {
  Eigen::MatrixXd out(data.n, data.p1 * data.p2);
  for (Eigen::Index i = 0; i < data.n; ++i) {
    out.row(i) =
        vectorize(w.w1_inv * data.predictors[static_cast<std::size_t>(i)] *
                  w.w2_inv)
            .transpose();
  }
  return out;
}

}  // namespace

Eigen::MatrixXd residual_matrix(const TraceDataset& data, const FitResult& fit) {
  if (fit.residuals.size() != data.n) {
    throw std::invalid_argument("residual_matrix: fit does not match dataset");
  }
  return devectorize(data.design.transpose() * fit.residuals, data.p1, data.p2) /
         static_cast<double>(data.n);
}

Eigen::MatrixXd complement_term(const TraceDataset& data, const WeightPair& w,
                                const FitResult& fit, double lambda,
                                const DofOptions& opts) {
  if (lambda <= 0.0) {
    throw std::invalid_argument("complement_term: lambda must be positive");
  }
  if (!fit.converged) {
    throw std::invalid_argument(
        "complement_term: fit did not converge; the residual matrix is not "
        "trustworthy");
  }
  check_dense_cap(data.p1 * data.p2, opts.max_dense_dim);
  if (fit.weighted_svd.rank() == 0) {
    return Eigen::MatrixXd::Zero(data.p1 * data.p2, data.p1 * data.p2);
  }
  const Eigen::MatrixXd design_t = transformed_design(data, w);
  const Eigen::MatrixXd gram_t =
      design_t.transpose() * design_t / static_cast<double>(data.n);
  const Eigen::MatrixXd theta_scaled =
      devectorize(design_t.transpose() * fit.residuals, data.p1, data.p2) /
      static_cast<double>(data.n);
  const Eigen::MatrixXd scaled_n = complement_block(fit.weighted_svd, theta_scaled);
  return complement_term_parts(gram_t, fit.weighted_svd, scaled_n, data.p1,
                               data.p2);
}

Eigen::MatrixXd sensitivity_matrix(const DofWorkspace& ws, double lambda) {
  return ws.gram + lambda * ws.polar + ws.complement;
}

DofContext::DofContext(const TraceDataset& data, const WeightPair& w,
                       DofOptions opts)
    : data_(&data), w_(&w), opts_(opts) {
  check_dense_cap(data.p1 * data.p2, opts_.max_dense_dim);
  design_t_ = transformed_design(data, w);
  gram_ = design_t_.transpose() * design_t_ / static_cast<double>(data.n);
  // rank of the second-moment matrix from the design spectrum (the squared
  // singular values), cheaper than factorizing the p x p Gram itself
  Eigen::BDCSVD<Eigen::MatrixXd> svd(design_t_);
  const Eigen::VectorXd s = svd.singularValues();
  gram_rank_ = 0;
  if (s.size() > 0 && s(0) > 0.0) {
    const double cutoff = opts_.rank_rel_tol * s(0) * s(0);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) * s(i) > cutoff) ++gram_rank_;
    }
  }
}

DofWorkspace DofContext::workspace(const FitResult& fit) const {
  DofWorkspace ws;
  ws.gram = gram_;
  ws.e_lambda = residual_matrix(*data_, fit);
  const TruncatedSvd& svd = fit.weighted_svd;
  ws.polar = polar_term(svd, data_->p1, data_->p2);
  if (svd.rank() > 0) {
    ws.weighted_pinv = svd.right *
                       svd.singular_values.cwiseInverse().asDiagonal() *
                       svd.left.transpose();
    const Eigen::MatrixXd theta_scaled =
        devectorize(design_t_.transpose() * fit.residuals, data_->p1, data_->p2) /
        static_cast<double>(data_->n);
    ws.complement = complement_term_parts(
        gram_, svd, complement_block(svd, theta_scaled), data_->p1, data_->p2);
  } else {
    ws.weighted_pinv = Eigen::MatrixXd::Zero(data_->p2, data_->p1);
    ws.complement = Eigen::MatrixXd::Zero(gram_.rows(), gram_.cols());
  }
  return ws;
}

DofEstimate DofContext::estimate(const FitResult& fit, double lambda) const {
  if (!fit.converged) {
    throw std::invalid_argument("degrees_of_freedom: fit did not converge");
  }
  DofEstimate est;
  est.gram_rank = gram_rank_;

  if (lambda == 0.0 || fit.weighted_svd.rank() == 0) {
    // endpoint convention: the unregularized fit and the all-zero fit both
    // report the rank of the design second-moment matrix
    est.df = static_cast<double>(gram_rank_);
    est.m_r_rank = gram_rank_;
    est.m_r_symmetric = true;
    est.branch = gram_rank_ == gram_.rows()
                     ? DofEstimate::Branch::full_rank_inverse
                     : DofEstimate::Branch::pseudo_inverse;
    est.condition_estimate = 1.0;
    est.min_singular_gap = std::numeric_limits<double>::infinity();
    est.close_singular_values = false;
    return est;
  }

  const DofWorkspace ws = workspace(fit);
  const Eigen::MatrixXd m_r = sensitivity_matrix(ws, lambda);

  const double m_norm = m_r.norm();
  est.m_r_symmetric =
      m_norm == 0.0 ||
      (m_r - m_r.transpose()).norm() <= kSymmetryTol * m_norm;

  const TruncatedSvd msvd = truncated_svd(m_r, opts_.pinv_rel_tol);
  est.m_r_rank = msvd.rank();
  est.branch = est.m_r_rank == m_r.rows()
                   ? DofEstimate::Branch::full_rank_inverse
                   : DofEstimate::Branch::pseudo_inverse;
  est.condition_estimate =
      msvd.rank() == 0 ? 1.0
                       : msvd.singular_values(0) /
                             msvd.singular_values(msvd.rank() - 1);
  const Eigen::MatrixXd pinv = msvd.rank() == 0
                                   ? Eigen::MatrixXd::Zero(m_r.cols(), m_r.rows())
                                   : Eigen::MatrixXd(msvd.right *
                                                     msvd.singular_values
                                                         .cwiseInverse()
                                                         .asDiagonal() *
                                                     msvd.left.transpose());
  est.df = (pinv * ws.gram).trace();

  // flag near-crossings in the retained weighted spectrum: the sensitivity
  // of the singular bases degrades as retained values coalesce
  const Eigen::VectorXd& b = fit.weighted_svd.singular_values;
  est.min_singular_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i + 1 < b.size(); ++i) {
    est.min_singular_gap =
        std::min(est.min_singular_gap, (b(i) - b(i + 1)) / b(0));
  }
  est.close_singular_values = b.size() > 1 &&
                              est.min_singular_gap < kCloseSpectrumTol;
  return est;
}

DofEstimate degrees_of_freedom(const TraceDataset& data, const WeightPair& w,
                               const FitResult& fit, double lambda,
                               const DofOptions& opts) {
  return DofContext(data, w, opts).estimate(fit, lambda);
}

}  // namespace antrace
