#include "antrace/dataset.hpp"

#include <stdexcept>
#include <utility>

#include "antrace/linalg.hpp"

namespace antrace {

double TraceDataset::inner(Eigen::Index i, const Eigen::MatrixXd& b) const {
  return predictors[static_cast<std::size_t>(i)].cwiseProduct(b).sum();
}

Eigen::VectorXd TraceDataset::predict(const Eigen::MatrixXd& b) const {
  return design * vectorize(b);
}

TraceDataset make_dataset(std::vector<Eigen::MatrixXd> predictors,
                          Eigen::VectorXd responses) {
  if (predictors.empty()) {
    throw std::invalid_argument("make_dataset: need at least one sample");
  }
  if (static_cast<Eigen::Index>(predictors.size()) != responses.size()) {
    throw std::invalid_argument("make_dataset: predictor/response count mismatch");
  }
  TraceDataset data;
  data.p1 = predictors.front().rows();
  data.p2 = predictors.front().cols();
  data.n = responses.size();
  if (data.p1 <= 0 || data.p2 <= 0) {
    throw std::invalid_argument("make_dataset: empty predictor shape");
  }
  data.design.resize(data.n, data.p1 * data.p2);
  for (Eigen::Index i = 0; i < data.n; ++i) {
    const Eigen::MatrixXd& x = predictors[static_cast<std::size_t>(i)];
    if (x.rows() != data.p1 || x.cols() != data.p2) {
      throw std::invalid_argument("make_dataset: inconsistent predictor shapes");
    }
    if (!x.allFinite()) {
      throw std::invalid_argument("make_dataset: non-finite predictor entries");
    }
    data.design.row(i) = vectorize(x).transpose();
  }
  if (!responses.allFinite()) {
    throw std::invalid_argument("make_dataset: non-finite responses");
  }
  data.predictors = std::move(predictors);
  data.responses = std::move(responses);
  return data;
}

TraceDataset dataset_from_design(const Eigen::MatrixXd& design,
                                 Eigen::VectorXd responses, Eigen::Index p1,
                                 Eigen::Index p2) {
  if (design.cols() != p1 * p2) {
    throw std::invalid_argument("dataset_from_design: column count != p1*p2");
  }
  std::vector<Eigen::MatrixXd> predictors;
  predictors.reserve(static_cast<std::size_t>(design.rows()));
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    predictors.push_back(devectorize(design.row(i).transpose(), p1, p2));
  }
  return make_dataset(std::move(predictors), std::move(responses));
}

TraceDataset subset(const TraceDataset& data,
                    const std::vector<Eigen::Index>& rows) {
  std::vector<Eigen::MatrixXd> predictors;
  predictors.reserve(rows.size());
  Eigen::VectorXd responses(static_cast<Eigen::Index>(rows.size()));
  Eigen::Index k = 0;
  for (Eigen::Index i : rows) {
    if (i < 0 || i >= data.n) {
      throw std::out_of_range("subset: row index out of range");
    }
    predictors.push_back(data.predictors[static_cast<std::size_t>(i)]);
    responses(k++) = data.responses(i);
  }
  return make_dataset(std::move(predictors), std::move(responses));
}

}  // namespace antrace
