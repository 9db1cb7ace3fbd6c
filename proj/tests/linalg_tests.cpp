#include <doctest.h>

#include <stdexcept>

#include "antrace/linalg.hpp"
#include "antrace/rng.hpp"
#include "test_support.hpp"

using namespace antrace;
using test_support::kron_oracle;
using test_support::random_matrix;

TEST_CASE("vectorize stacks columns") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 3, 2, 4;
  const Eigen::VectorXd v = vectorize(m);
  CHECK(v(0) == 1);
  CHECK(v(1) == 2);
  CHECK(v(2) == 3);
  CHECK(v(3) == 4);

  CHECK(vectorize(Eigen::MatrixXd::Zero(3, 2)).isZero(0.0));
  CHECK(vectorize(Eigen::MatrixXd::Zero(3, 2)).size() == 6);
}

TEST_CASE("vectorize/devectorize round-trip") {
  Rng rng(7);
  const Eigen::MatrixXd m = random_matrix(rng, 3, 4);
  CHECK(devectorize(vectorize(m), 3, 4) == m);

  for (auto [r, c] : {std::pair<int, int>{1, 1}, {7, 3}, {50, 50}, {2, 49}}) {
    const Eigen::MatrixXd a = random_matrix(rng, r, c);
    CHECK(devectorize(vectorize(a), r, c) == a);
  }
  CHECK_THROWS_AS(devectorize(Eigen::VectorXd::Zero(5), 2, 2),
                  std::invalid_argument);
}

TEST_CASE("kronecker basics") {
  CHECK(kronecker(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3))
            .isApprox(Eigen::MatrixXd::Identity(6, 6)));

  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 0, 1, 1, 0;
  CHECK((kronecker(a, b) - kron_oracle(a, b)).norm() == 0.0);

  CHECK_THROWS_AS(kronecker(Eigen::MatrixXd::Zero(100000, 2),
                            Eigen::MatrixXd::Zero(100000, 2)),
                  std::length_error);
}

TEST_CASE("vec(ABC) = (C^T kron A) vec(B)") {
  Rng rng(11);
  const Eigen::MatrixXd a = random_matrix(rng, 2, 3);
  const Eigen::MatrixXd b = random_matrix(rng, 3, 2);
  const Eigen::MatrixXd c = random_matrix(rng, 2, 4);
  const Eigen::VectorXd lhs = vectorize(a * b * c);
  const Eigen::VectorXd rhs = kronecker(c.transpose(), a) * vectorize(b);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("mixed product rule") {
  Rng rng(13);
  const Eigen::MatrixXd a = random_matrix(rng, 3, 2);
  const Eigen::MatrixXd b = random_matrix(rng, 2, 4);
  const Eigen::MatrixXd c = random_matrix(rng, 2, 5);
  const Eigen::MatrixXd d = random_matrix(rng, 4, 3);
  const Eigen::MatrixXd lhs = kronecker(a, b) * kronecker(c, d);
  const Eigen::MatrixXd rhs = kronecker(a * c, b * d);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("commutation matrix") {
  CHECK(commutation_matrix(1, 1) == Eigen::MatrixXd::Ones(1, 1));

  // vec(A) = (1,2,3,4) maps to vec(A^T) = (1,3,2,4)
  Eigen::MatrixXd a(2, 2);
  a << 1, 3, 2, 4;
  const Eigen::VectorXd permuted = commutation_matrix(2, 2) * vectorize(a);
  CHECK(permuted(0) == 1);
  CHECK(permuted(1) == 3);
  CHECK(permuted(2) == 2);
  CHECK(permuted(3) == 4);
  CHECK((permuted - vectorize(a.transpose())).norm() == 0.0);

  Rng rng(17);
  const Eigen::MatrixXd m = random_matrix(rng, 3, 4);
  const Eigen::MatrixXd k = commutation_matrix(3, 4);
  CHECK((k * vectorize(m) - vectorize(m.transpose())).norm() == 0.0);
  CHECK((k - test_support::commutation_oracle(3, 4)).norm() == 0.0);

  // orthogonal permutation, and K_{n,m} = K_{m,n}^T
  CHECK((k.transpose() * k).isApprox(Eigen::MatrixXd::Identity(12, 12)));
  CHECK(commutation_matrix(4, 3).isApprox(k.transpose()));

  CHECK_THROWS_AS(commutation_matrix(101, 101), std::length_error);
}

TEST_CASE("commutation apply variants agree with the materialized form") {
  Rng rng(19);
  const Eigen::MatrixXd k = commutation_matrix(3, 4);
  const Eigen::VectorXd v = test_support::random_vector(rng, 12);
  CHECK((commutation_apply(3, 4, v) - k * v).norm() == 0.0);

  const Eigen::MatrixXd m = random_matrix(rng, 12, 5);
  CHECK((commutation_apply_rows(3, 4, m) - k * m).norm() == 0.0);

  const Eigen::MatrixXd w = random_matrix(rng, 5, 12);
  CHECK((commutation_apply_cols(3, 4, w) - w * k).norm() == 0.0);
}

TEST_CASE("truncated_svd") {
  const TruncatedSvd id = truncated_svd(Eigen::MatrixXd::Identity(3, 3), 1e-8);
  CHECK(id.rank() == 3);
  CHECK(id.singular_values.isApprox(Eigen::VectorXd::Ones(3)));

  Eigen::MatrixXd nearly = Eigen::Vector2d(5.0, 5e-12).asDiagonal();
  CHECK(truncated_svd(nearly, 1e-8).rank() == 1);

  Rng rng(23);
  const Eigen::MatrixXd low = random_matrix(rng, 5, 1) * random_matrix(rng, 1, 4) +
                              random_matrix(rng, 5, 1) * random_matrix(rng, 1, 4);
  const TruncatedSvd svd = truncated_svd(low, 1e-8);
  CHECK(svd.rank() == 2);
  CHECK((svd.reconstruct() - low).norm() <= 1e-10 * low.norm());
  CHECK((svd.left.transpose() * svd.left -
         Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-10);
  CHECK((svd.right.transpose() * svd.right -
         Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-10);
  CHECK(svd.singular_values(0) >= svd.singular_values(1));

  CHECK(truncated_svd(Eigen::MatrixXd::Zero(4, 3), 1e-8).rank() == 0);
  CHECK_THROWS_AS(truncated_svd(nearly, 1.5), std::invalid_argument);
}

TEST_CASE("pseudo_inverse") {
  CHECK(pseudo_inverse(Eigen::MatrixXd::Identity(4, 4))
            .isApprox(Eigen::MatrixXd::Identity(4, 4)));

  Eigen::MatrixXd d = Eigen::Vector2d(2.0, 0.0).asDiagonal();
  const Eigen::MatrixXd dp = pseudo_inverse(d);
  CHECK(dp(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(dp(1, 1) == 0.0);

  Rng rng(29);
  const Eigen::MatrixXd m = random_matrix(rng, 4, 4) +
                            4.0 * Eigen::MatrixXd::Identity(4, 4);
  CHECK((pseudo_inverse(m) - m.inverse()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("Moore-Penrose properties on rank-deficient inputs") {
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Index rows = 3 + static_cast<Eigen::Index>(rng.below(4));
    const Eigen::Index cols = 3 + static_cast<Eigen::Index>(rng.below(4));
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(
                                   rng.below(static_cast<std::uint64_t>(
                                       std::min(rows, cols) - 1)));
    const Eigen::MatrixXd m =
        random_matrix(rng, rows, r) * random_matrix(rng, r, cols);
    const Eigen::MatrixXd p = pseudo_inverse(m);
    CHECK((m * p * m - m).norm() < 1e-8 * std::max(1.0, m.norm()));
    CHECK((p * m * p - p).norm() < 1e-8 * std::max(1.0, p.norm()));
    CHECK((m * p - (m * p).transpose()).norm() < 1e-8);
    CHECK((p * m - (p * m).transpose()).norm() < 1e-8);
  }
}
