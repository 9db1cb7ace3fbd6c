#include "antrace/weights.hpp"

#include <cmath>
#include <stdexcept>

#include "antrace/linalg.hpp"

namespace antrace {

namespace {

// Rank inference is not the concern here; a loose cutoff on the squared
// spectrum only has to separate genuine directions from exact-zero noise.
constexpr double kGramPinvTol = 1e-12;

// Completes `basis` (orthonormal columns) to a full orthonormal basis of
// R^dim with Gram-Schmidt against the standard basis. At every step the
// standard vector with the largest residual is taken, which is
// deterministic and keeps the completion well conditioned.
Eigen::MatrixXd complete_orthonormal(const Eigen::MatrixXd& basis,
                                     Eigen::Index dim) {
  Eigen::MatrixXd full(dim, dim);
  Eigen::Index have = basis.cols();
  full.leftCols(have) = basis;
  std::vector<bool> used(static_cast<std::size_t>(dim), false);
  while (have < dim) {
    Eigen::Index best = -1;
    double best_norm = -1.0;
    Eigen::VectorXd best_residual;
    for (Eigen::Index c = 0; c < dim; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      Eigen::VectorXd r = Eigen::VectorXd::Unit(dim, c);
      // two-pass projection for orthogonality near machine precision
      for (int pass = 0; pass < 2; ++pass) {
        r -= full.leftCols(have) * (full.leftCols(have).transpose() * r);
      }
      const double norm = r.norm();
      if (norm > best_norm) {
        best_norm = norm;
        best = c;
        best_residual = r;
      }
    }
    if (best < 0 || best_norm <= 1e-8) {
      throw std::runtime_error("complete_orthonormal: degenerate basis");
    }
    used[static_cast<std::size_t>(best)] = true;
    full.col(have++) = best_residual / best_norm;
  }
  return full;
}

Eigen::MatrixXd spectral_power(const Eigen::MatrixXd& basis,
                               const Eigen::VectorXd& spectrum, double expo) {
  Eigen::VectorXd powered(spectrum.size());
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
    powered(i) = std::pow(spectrum(i), expo);
  }
  return basis * powered.asDiagonal() * basis.transpose();
}

}  // namespace

WeightPair WeightPair::identity(Eigen::Index p1, Eigen::Index p2) {
  WeightPair w;
  w.w1 = Eigen::MatrixXd::Identity(p1, p1);
  w.w2 = Eigen::MatrixXd::Identity(p2, p2);
  w.w1_inv = w.w1;
  w.w2_inv = w.w2;
  w.gamma = 1.0;
  w.padded_spectrum_1 = Eigen::VectorXd::Ones(p1);
  w.padded_spectrum_2 = Eigen::VectorXd::Ones(p2);
  return w;
}

Eigen::MatrixXd fit_least_squares(const TraceDataset& data) {
  const Eigen::MatrixXd gram = data.design.transpose() * data.design;
  const Eigen::VectorXd rhs = data.design.transpose() * data.responses;
  const Eigen::VectorXd coef = pseudo_inverse(gram, kGramPinvTol) * rhs;
  return devectorize(coef, data.p1, data.p2);
}

WeightPair build_weights(const Eigen::MatrixXd& b_ls, Eigen::Index n_samples,
                         double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("build_weights: gamma must be in (0, 1]");
  }
  if (n_samples < 1) {
    throw std::invalid_argument("build_weights: need n >= 1");
  }
  const Eigen::Index p1 = b_ls.rows();
  const Eigen::Index p2 = b_ls.cols();
  const Eigen::Index m = std::min(p1, p2);
  const double pad = 1.0 / std::sqrt(static_cast<double>(n_samples));

  // rel_tol 0: keep the full thin factorization, zeros included; the floor
  // below takes care of them.
  Eigen::MatrixXd u, v;
  Eigen::VectorXd s;
  {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        b_ls, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    s = svd.singularValues();
    v = svd.matrixV();
  }

  WeightPair w;
  w.gamma = gamma;
  w.padded_spectrum_1 = Eigen::VectorXd::Constant(p1, pad);
  w.padded_spectrum_2 = Eigen::VectorXd::Constant(p2, pad);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double floored = std::max(s(i), pad);
    w.padded_spectrum_1(i) = floored;
    w.padded_spectrum_2(i) = floored;
  }
  if ((w.padded_spectrum_1.array() <= 0.0).any() ||
      (w.padded_spectrum_2.array() <= 0.0).any()) {
    throw std::runtime_error("build_weights: nonpositive padded spectrum");
  }

  const Eigen::MatrixXd u_full = p1 == m ? u : complete_orthonormal(u, p1);
  const Eigen::MatrixXd v_full = p2 == m ? v : complete_orthonormal(v, p2);

  w.w1 = spectral_power(u_full, w.padded_spectrum_1, -gamma);
  w.w1_inv = spectral_power(u_full, w.padded_spectrum_1, gamma);
  w.w2 = spectral_power(v_full, w.padded_spectrum_2, -gamma);
  w.w2_inv = spectral_power(v_full, w.padded_spectrum_2, gamma);
  return w;
}

TraceDataset transform_design(const TraceDataset& data, const WeightPair& w) {
  if (w.w1.rows() != data.p1 || w.w2.rows() != data.p2) {
    throw std::invalid_argument("transform_design: weight shapes do not match");
  }
  std::vector<Eigen::MatrixXd> transformed;
  transformed.reserve(static_cast<std::size_t>(data.n));
  for (const Eigen::MatrixXd& x : data.predictors) {
    transformed.push_back(w.w1_inv * x * w.w2_inv);
  }
  return make_dataset(std::move(transformed), data.responses);
}

}  // namespace antrace
