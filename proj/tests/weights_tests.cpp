#include <doctest.h>

#include <numeric>
#include <stdexcept>

#include "antrace/linalg.hpp"
#include "antrace/rng.hpp"
#include "antrace/weights.hpp"
#include "test_support.hpp"

using namespace antrace;
using test_support::random_matrix;
using test_support::random_vector;

namespace {

TraceDataset random_rank1_data(std::uint64_t seed, Eigen::Index p1,
                               Eigen::Index p2, Eigen::Index n) {
  return test_support::random_instance(seed, p1, p2, n);
}

}  // namespace

TEST_CASE("least squares: single unit-entry sample") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 2);
  x(0, 0) = 1.0;
  Eigen::VectorXd y(1);
  y << 3.0;
  const TraceDataset data = make_dataset({x}, y);
  const Eigen::MatrixXd b = fit_least_squares(data);
  CHECK(b(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(b(0, 1)) < 1e-12);
  CHECK(std::abs(b(1, 0)) < 1e-12);
  CHECK(std::abs(b(1, 1)) < 1e-12);
}

TEST_CASE("least squares: orthonormal design inverts trivially") {
  // design = random orthogonal matrix, n = p1*p2
  Rng rng(41);
  const Eigen::Index p1 = 2, p2 = 3, p = p1 * p2;
  const Eigen::MatrixXd q =
      Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(rng, p, p))
          .householderQ();
  const Eigen::VectorXd y = random_vector(rng, p);
  const TraceDataset data = dataset_from_design(q, y, p1, p2);
  const Eigen::MatrixXd b = fit_least_squares(data);
  const Eigen::MatrixXd expected = devectorize(q.transpose() * y, p1, p2);
  CHECK((b - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("least squares matches a normal-equations oracle") {
  const TraceDataset data = random_rank1_data(5, 3, 4, 50);
  const Eigen::MatrixXd b = fit_least_squares(data);
  // independent route: dense LDLT factorization of the normal equations
  const Eigen::MatrixXd gram = data.design.transpose() * data.design;
  const Eigen::VectorXd coef =
      gram.ldlt().solve(data.design.transpose() * data.responses);
  CHECK((vectorize(b) - coef).norm() < 1e-8);

  const Eigen::VectorXd grad =
      data.design.transpose() * (data.design * vectorize(b) - data.responses) /
      static_cast<double>(data.n);
  CHECK(grad.norm() <= 1e-8 * (1.0 + data.responses.norm()));
}

TEST_CASE("least squares is invariant under row permutation") {
  const TraceDataset data = random_rank1_data(6, 3, 3, 20);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(data.n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[3], perm[11]);
  const TraceDataset shuffled = subset(data, perm);
  CHECK((fit_least_squares(data) - fit_least_squares(shuffled)).norm() < 1e-10);
}

TEST_CASE("build_weights: identity least-squares fit is a fixed point") {
  const WeightPair w = build_weights(Eigen::MatrixXd::Identity(3, 3), 100, 1.0);
  CHECK(w.w1.isApprox(Eigen::MatrixXd::Identity(3, 3), 1e-12));
  CHECK(w.w2.isApprox(Eigen::MatrixXd::Identity(3, 3), 1e-12));
}

TEST_CASE("build_weights: spectrum is inverted at gamma = 1") {
  Rng rng(43);
  // construct a 2x2 with singular values (2, 0.5) and known directions
  const Eigen::MatrixXd q1 =
      Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(rng, 2, 2))
          .householderQ();
  const Eigen::MatrixXd q2 =
      Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(rng, 2, 2))
          .householderQ();
  const Eigen::MatrixXd b_ls =
      q1 * Eigen::Vector2d(2.0, 0.5).asDiagonal() * q2.transpose();
  const WeightPair w = build_weights(b_ls, 10000, 1.0);
  CHECK((w.w1 * q1.col(0) - 0.5 * q1.col(0)).norm() < 1e-9);
  CHECK((w.w1 * q1.col(1) - 2.0 * q1.col(1)).norm() < 1e-9);
  CHECK((w.w2 * q2.col(0) - 0.5 * q2.col(0)).norm() < 1e-9);
  CHECK((w.w2 * q2.col(1) - 2.0 * q2.col(1)).norm() < 1e-9);
}

TEST_CASE("build_weights: padding with n^{-1/2}") {
  Rng rng(47);
  const Eigen::MatrixXd b_ls = random_matrix(rng, 2, 3);  // full row rank a.s.
  const WeightPair w = build_weights(b_ls, 100, 1.0);
  const Eigen::VectorXd s =
      Eigen::JacobiSVD<Eigen::MatrixXd>(b_ls).singularValues();
  CHECK(w.padded_spectrum_2.size() == 3);
  CHECK(w.padded_spectrum_2(0) == doctest::Approx(std::max(s(0), 0.1)));
  CHECK(w.padded_spectrum_2(1) == doctest::Approx(std::max(s(1), 0.1)));
  CHECK(w.padded_spectrum_2(2) == doctest::Approx(0.1));
}

TEST_CASE("build_weights rejects gamma outside (0,1]") {
  const Eigen::MatrixXd b = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(build_weights(b, 10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_weights(b, 10, -0.5), std::invalid_argument);
  CHECK_THROWS_AS(build_weights(b, 10, 1.5), std::invalid_argument);
}

TEST_CASE("weight pairs are SPD with consistent inverses") {
  Rng rng(53);
  for (double gamma : {0.25, 0.5, 1.0}) {
    const Eigen::MatrixXd b_ls = random_matrix(rng, 3, 5);
    const WeightPair w = build_weights(b_ls, 40, gamma);
    CHECK((w.w1 - w.w1.transpose()).norm() < 1e-10);
    CHECK((w.w2 - w.w2.transpose()).norm() < 1e-10);
    CHECK((w.w1 * w.w1_inv - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-8);
    CHECK((w.w2 * w.w2_inv - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-8);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(w.w1), e2(w.w2);
    CHECK(e1.eigenvalues().minCoeff() > 0.0);
    CHECK(e2.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("weights drift from identity monotonically in gamma") {
  Rng rng(59);
  const Eigen::MatrixXd b_ls = random_matrix(rng, 4, 4);
  double previous = 0.0;
  for (double gamma : {0.25, 0.5, 1.0}) {
    const WeightPair w = build_weights(b_ls, 30, gamma);
    const double dist =
        (w.w1 - Eigen::MatrixXd::Identity(4, 4)).norm();
    CHECK(dist >= previous - 1e-12);
    previous = dist;
  }
}

TEST_CASE("transform_design: identity weights change nothing") {
  const TraceDataset data = random_rank1_data(7, 3, 4, 12);
  const TraceDataset out = transform_design(data, WeightPair::identity(3, 4));
  CHECK((out.design - data.design).norm() == 0.0);
  CHECK((out.responses - data.responses).norm() == 0.0);
}

TEST_CASE("transform_design preserves the penalized inner products") {
  Rng rng(61);
  const TraceDataset data = random_rank1_data(8, 3, 4, 15);
  const WeightPair w = build_weights(fit_least_squares(data), data.n, 1.0);
  const TraceDataset transformed = transform_design(data, w);
  for (int trial = 0; trial < 4; ++trial) {
    const Eigen::MatrixXd b = random_matrix(rng, 3, 4);
    const Eigen::MatrixXd c = w.w1 * b * w.w2;
    for (Eigen::Index i = 0; i < data.n; ++i) {
      CHECK(transformed.inner(i, c) ==
            doctest::Approx(data.inner(i, b)).epsilon(1e-10));
    }
  }
}

TEST_CASE("transform_design round-trips through the inverse pair") {
  const TraceDataset data = random_rank1_data(9, 4, 3, 10);
  const WeightPair w = build_weights(fit_least_squares(data), data.n, 0.5);
  WeightPair inverse = w;
  std::swap(inverse.w1, inverse.w1_inv);
  std::swap(inverse.w2, inverse.w2_inv);
  const TraceDataset back = transform_design(transform_design(data, w), inverse);
  CHECK((back.design - data.design).cwiseAbs().maxCoeff() < 1e-10);
}
