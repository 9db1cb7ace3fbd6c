#ifndef ANTRACE_DATASET_HPP
#define ANTRACE_DATASET_HPP

#include <vector>

#include <Eigen/Dense>

namespace antrace {

/// Sample of a trace regression: matrix predictors X_i in R^{p1 x p2} with
/// scalar responses y_i, plus the cached vectorized design whose row i is
/// vec(X_i)^T.
struct TraceDataset {
  Eigen::Index p1 = 0;
  Eigen::Index p2 = 0;
  Eigen::Index n = 0;
  std::vector<Eigen::MatrixXd> predictors;
  Eigen::VectorXd responses;
  Eigen::MatrixXd design;  // n x (p1*p2)

  /// <X_i, B> for one sample.
  double inner(Eigen::Index i, const Eigen::MatrixXd& b) const;

  /// Fitted values X * vec(b).
  Eigen::VectorXd predict(const Eigen::MatrixXd& b) const;
};

/// Builds a dataset from predictors and responses; validates shapes and
/// finiteness and fills the vectorized design.
TraceDataset make_dataset(std::vector<Eigen::MatrixXd> predictors,
                          Eigen::VectorXd responses);

/// Builds a dataset from an already-vectorized design (rows are vec(X_i)^T
/// in column-major order).
TraceDataset dataset_from_design(const Eigen::MatrixXd& design,
                                 Eigen::VectorXd responses, Eigen::Index p1,
                                 Eigen::Index p2);

/// Row subset (used by cross-validation folds).
TraceDataset subset(const TraceDataset& data,
                    const std::vector<Eigen::Index>& rows);

}  // namespace antrace

#endif
