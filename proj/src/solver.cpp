#include "antrace/solver.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "antrace/spectral_jacobian.hpp"

namespace antrace {

namespace {

// Shared per-path state: the transformed design, its second moment and the
// gradient Lipschitz constant.
struct TransformedProblem {
  Eigen::Index p1 = 0, p2 = 0, n = 0;
  Eigen::MatrixXd design;   // rows vec(W1^{-1} X_i W2^{-1})^T
  Eigen::VectorXd y;
  Eigen::MatrixXd gram;     // design^T design / n
  Eigen::VectorXd xty;      // design^T y / n
  double lipschitz = 0.0;
  bool gram_gradient = false;  // gradient via gram (p^2) vs design (2np)

  double yty_half = 0.0;  // 0.5 * ||y||^2 / n

  Eigen::VectorXd gradient(const Eigen::VectorXd& c) const {
    if (gram_gradient) {
      return gram * c - xty;
    }
    return design.transpose() * (design * c) / static_cast<double>(n) - xty;
  }

  // (1/2n)||y - X c||^2 evaluated through the second moment.
  double smooth_value(const Eigen::VectorXd& c) const {
    if (gram_gradient) {
      return 0.5 * c.dot(gram * c) - c.dot(xty) + yty_half;
    }
    const Eigen::VectorXd r = y - design * c;
    return 0.5 * r.squaredNorm() / static_cast<double>(n);
  }
};

TransformedProblem make_problem(const TraceDataset& data, const WeightPair& w) {
  TransformedProblem prob;
  prob.p1 = data.p1;
  prob.p2 = data.p2;
  prob.n = data.n;
  prob.y = data.responses;
  prob.design.resize(data.n, data.p1 * data.p2);
  for (Eigen::Index i = 0; i < data.n; ++i) {
    prob.design.row(i) =
        vectorize(w.w1_inv * data.predictors[static_cast<std::size_t>(i)] *
                  w.w2_inv)
            .transpose();
  }
  prob.gram = prob.design.transpose() * prob.design / static_cast<double>(data.n);
  prob.xty = prob.design.transpose() * data.responses / static_cast<double>(data.n);
  prob.yty_half = 0.5 * data.responses.squaredNorm() / static_cast<double>(data.n);
  const Eigen::Index p = prob.gram.rows();
  prob.gram_gradient = p < 2 * data.n;
  if (p <= 600) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(prob.gram,
                                                       Eigen::EigenvaluesOnly);
    prob.lipschitz = eig.eigenvalues().maxCoeff();
  } else {
    // power iteration with a fixed start and a safety margin
    Eigen::VectorXd v = Eigen::VectorXd::Ones(p).normalized();
    double value = 0.0;
    for (int it = 0; it < 200; ++it) {
      Eigen::VectorXd next = prob.gram * v;
      value = next.norm();
      if (value == 0.0) break;
      v = next / value;
    }
    prob.lipschitz = value * 1.05;
  }
  return prob;
}

// Stationarity violation at C for the transformed problem. Identical to the
// original-coordinates certificate because
// (1/(n lam)) W1^{-1} (sum res_i X_i) W2^{-1} = (1/(n lam)) devec(X~^T res)
// and W1 B W2 = C share their singular structure.
double kkt_residual(const TransformedProblem& prob, double lambda,
                    const Eigen::MatrixXd& c, double svd_rel_tol) {
  // (1/n) X~^T (y - X~ c) through the cached second moment
  const Eigen::MatrixXd g =
      devectorize(prob.xty - prob.gram * vectorize(c), prob.p1, prob.p2) /
      lambda;
  const TruncatedSvd svd = truncated_svd(c, svd_rel_tol);
  const Eigen::Index r = svd.rank();
  if (r == 0) {
    const TruncatedSvd gsvd = truncated_svd(g, 0.0);
    const double top = gsvd.rank() == 0 ? 0.0 : gsvd.singular_values(0);
    return std::max(top - 1.0, 0.0);
  }
  const Eigen::MatrixXd& u = svd.left;
  const Eigen::MatrixXd& v = svd.right;
  const Eigen::MatrixXd core =
      u.transpose() * g * v - Eigen::MatrixXd::Identity(r, r);
  const Eigen::MatrixXd gv = g * v;              // p1 x r
  const Eigen::MatrixXd ug = u.transpose() * g;  // r x p2
  const Eigen::MatrixXd cross_left = gv - u * (u.transpose() * gv);
  const Eigen::MatrixXd cross_right = ug - (ug * v) * v.transpose();
  const Eigen::MatrixXd outer =
      g - u * ug - gv * v.transpose() + u * (ug * v) * v.transpose();
  double outer_top = 0.0;
  {
    const TruncatedSvd osvd = truncated_svd(outer, 0.0);
    if (osvd.rank() > 0) outer_top = osvd.singular_values(0);
  }
  const double off = std::sqrt(cross_left.squaredNorm() + cross_right.squaredNorm());
  return core.norm() + std::max(outer_top - 1.0, 0.0) + off;
}

// Second-order refinement on the current fixed-rank manifold. First-order
// steps identify the active rank quickly, but their tail convergence is
// governed by the conditioning of the transformed Gram, which the weight
// conjugation can make extreme at small lambda. On the manifold the
// stationarity system is smooth, so a few Newton steps on its tangent-space
// linearization finish the job; the linearization is the same sensitivity
// operator the degrees-of-freedom estimate is built from. Steps are only
// accepted when the stationarity residual decreases; on failure the caller
// keeps iterating first-order.
bool newton_polish(const TransformedProblem& prob, double lambda,
                   double kkt_tol, double svd_rel_tol, Eigen::MatrixXd* c,
                   double* kkt) {
  const Eigen::Index p1 = prob.p1, p2 = prob.p2;
  double current = *kkt;
  for (int step = 0; step < 30; ++step) {
    *kkt = current;
    if (current <= kkt_tol) return true;
    const TruncatedSvd svd = truncated_svd(*c, svd_rel_tol);
    const Eigen::Index r = svd.rank();
    if (r == 0) return false;

    const Eigen::VectorXd grad = prob.gram * vectorize(*c) - prob.xty;
    const Eigen::MatrixXd theta_scaled = devectorize(-grad, p1, p2);
    const Eigen::MatrixXd scaled_n = complement_block(svd, theta_scaled);
    const Eigen::VectorXd residual =
        grad - vectorize(complement_block(svd, devectorize(grad, p1, p2))) +
        lambda * vectorize(svd.left * svd.right.transpose());

    const Eigen::MatrixXd jac =
        prob.gram + lambda * polar_term(svd, p1, p2) +
        complement_term_parts(prob.gram, svd, scaled_n, p1, p2);
    const Eigen::VectorXd delta = -pseudo_inverse(jac, 1e-12) * residual;

    bool accepted = false;
    double scale = 1.0;
    for (int attempt = 0; attempt < 3; ++attempt, scale *= 0.5) {
      Eigen::MatrixXd moved = *c + scale * devectorize(delta, p1, p2);
      // retract onto the rank-r manifold
      Eigen::JacobiSVD<Eigen::MatrixXd> rsvd(
          moved, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Eigen::Index keep = std::min<Eigen::Index>(r, rsvd.singularValues().size());
      const Eigen::MatrixXd candidate =
          rsvd.matrixU().leftCols(keep) *
          rsvd.singularValues().head(keep).asDiagonal() *
          rsvd.matrixV().leftCols(keep).transpose();
      const double next = kkt_residual(prob, lambda, candidate, svd_rel_tol);
      if (next < current) {
        *c = candidate;
        current = next;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      *kkt = current;
      return false;
    }
  }
  *kkt = current;
  return current <= kkt_tol;
}

FitResult finalize(const TraceDataset& data, const WeightPair& w,
                   double lambda, const Eigen::MatrixXd& c_hat,
                   double svd_rel_tol, int iterations, bool converged,
                   double kkt) {
  FitResult fit;
  fit.lambda = lambda;
  fit.b_hat = w.w1_inv * c_hat * w.w2_inv;
  const Eigen::MatrixXd sandwich = w.w1 * fit.b_hat * w.w2;
  fit.weighted_svd = truncated_svd(sandwich, svd_rel_tol);
  fit.rank = fit.weighted_svd.rank();
  fit.residuals = data.responses - data.predict(fit.b_hat);
  const Eigen::VectorXd all_sv =
      Eigen::JacobiSVD<Eigen::MatrixXd>(sandwich).singularValues();
  fit.objective = 0.5 * fit.residuals.squaredNorm() / static_cast<double>(data.n) +
                  lambda * all_sv.sum();
  fit.iterations = iterations;
  fit.converged = converged;
  fit.optimality_residual = kkt;
  return fit;
}

FitResult solve_least_squares(const TraceDataset& data, const WeightPair& w,
                              const SolverOptions& opts) {
  const Eigen::MatrixXd b = fit_least_squares(data);
  FitResult fit = finalize(data, w, 0.0, w.w1 * b * w.w2, opts.svd_rel_tol,
                           0, true, 0.0);
  // stationarity of the unregularized problem: the residual gradient
  fit.optimality_residual =
      (data.design.transpose() * fit.residuals / static_cast<double>(data.n))
          .norm();
  fit.converged = fit.optimality_residual <=
                  std::max(opts.kkt_tolerance,
                           1e-8 * (1.0 + data.responses.norm()));
  return fit;
}

FitResult solve_impl(const TransformedProblem& prob, const TraceDataset& data,
                     const WeightPair& w, double lambda,
                     const SolverOptions& opts,
                     const Eigen::MatrixXd* warm_c) {
  if (opts.invocation_counter != nullptr) {
    opts.invocation_counter->fetch_add(1, std::memory_order_relaxed);
  }
  const Eigen::Index p1 = prob.p1, p2 = prob.p2;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p1, p2);
  if (warm_c != nullptr) {
    c = *warm_c;
  } else if (opts.warm_start.has_value()) {
    c = w.w1 * (*opts.warm_start) * w.w2;
  }

  const double step = 1.0 / std::max(prob.lipschitz, 1e-300);
  Eigen::MatrixXd z = c;
  double t = 1.0;
  double f_prev = std::numeric_limits<double>::infinity();

  double best_kkt = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd best_c = c;
  int it = 0;
  const int check_every = 10;
  const bool polish_allowed = p1 * p2 <= 2500;
  int next_polish = 200;
  int polish_gap = 400;
  for (; it < opts.max_iterations; ++it) {
    const Eigen::VectorXd grad = prob.gradient(vectorize(z));
    const Eigen::MatrixXd arg = z - step * devectorize(grad, p1, p2);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(arg,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd s = svd.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      s(i) = std::max(s(i) - lambda * step, 0.0);
    }
    const Eigen::MatrixXd candidate =
        svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
    const double f = prob.smooth_value(vectorize(candidate)) + lambda * s.sum();
    if (f > f_prev) {
      // momentum overshoot: restart from the last accepted iterate
      t = 1.0;
      z = c;
      f_prev = std::numeric_limits<double>::infinity();
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = candidate + ((t - 1.0) / t_next) * (candidate - c);
    c = candidate;
    t = t_next;
    f_prev = f;

    if (it % check_every == 0 || it + 1 == opts.max_iterations) {
      double kkt = kkt_residual(prob, lambda, c, opts.svd_rel_tol);
      if (kkt <= opts.kkt_tolerance) {
        best_kkt = kkt;
        best_c = c;
        ++it;
        break;
      }
      if (polish_allowed && it >= next_polish) {
        const bool done = newton_polish(prob, lambda, opts.kkt_tolerance,
                                        opts.svd_rel_tol, &c, &kkt);
        polish_gap = std::min(polish_gap * 2, 20000);
        next_polish = it + polish_gap;
        if (done) {
          best_kkt = kkt;
          best_c = c;
          ++it;
          break;
        }
        // partial progress still helps: restart momentum from the better point
        z = c;
        t = 1.0;
        f_prev = std::numeric_limits<double>::infinity();
      }
      if (kkt < best_kkt) {
        best_kkt = kkt;
        best_c = c;
      }
    }
  }
  {
    const double kkt = kkt_residual(prob, lambda, c, opts.svd_rel_tol);
    if (kkt < best_kkt) {
      best_kkt = kkt;
      best_c = c;
    }
  }
  return finalize(data, w, lambda, best_c, opts.svd_rel_tol, it,
                  best_kkt <= opts.kkt_tolerance, best_kkt);
}

}  // namespace

Eigen::MatrixXd svt_prox(const Eigen::MatrixXd& m, double tau) {
  if (tau < 0.0) {
    throw std::invalid_argument("svt_prox: tau must be nonnegative");
  }
  if (tau == 0.0) {
    return m;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    s(i) = std::max(s(i) - tau, 0.0);
  }
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

FitResult solve(const TraceDataset& data, const WeightPair& w, double lambda,
                const SolverOptions& opts) {
  if (lambda < 0.0) {
    throw std::invalid_argument("solve: lambda must be nonnegative");
  }
  if (lambda == 0.0) {
    if (opts.invocation_counter != nullptr) {
      opts.invocation_counter->fetch_add(1, std::memory_order_relaxed);
    }
    return solve_least_squares(data, w, opts);
  }
  const TransformedProblem prob = make_problem(data, w);
  return solve_impl(prob, data, w, lambda, opts, nullptr);
}

std::vector<FitResult> solve_path(const TraceDataset& data, const WeightPair& w,
                                  const std::vector<double>& grid,
                                  const SolverOptions& opts) {
  if (grid.empty()) {
    throw std::invalid_argument("solve_path: empty grid");
  }
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&grid](std::size_t a, std::size_t b) {
    return grid[a] > grid[b];
  });

  const TransformedProblem prob = make_problem(data, w);
  std::vector<FitResult> results(grid.size());
  Eigen::MatrixXd warm;
  bool have_warm = false;
  for (std::size_t idx : order) {
    const double lambda = grid[idx];
    if (lambda < 0.0) {
      throw std::invalid_argument("solve_path: negative lambda in grid");
    }
    if (lambda == 0.0) {
      if (opts.invocation_counter != nullptr) {
        opts.invocation_counter->fetch_add(1, std::memory_order_relaxed);
      }
      results[idx] = solve_least_squares(data, w, opts);
    } else {
      results[idx] = solve_impl(prob, data, w, lambda, opts,
                                have_warm ? &warm : nullptr);
    }
    warm = w.w1 * results[idx].b_hat * w.w2;
    have_warm = true;
  }
  return results;
}

double optimality_residual(const TraceDataset& data, const WeightPair& w,
                           double lambda, const Eigen::MatrixXd& b,
                           double svd_rel_tol) {
  if (lambda <= 0.0) {
    throw std::invalid_argument("optimality_residual: lambda must be positive");
  }
  const TransformedProblem prob = make_problem(data, w);
  return kkt_residual(prob, lambda, w.w1 * b * w.w2, svd_rel_tol);
}

double lambda_max(const TraceDataset& data, const WeightPair& w) {
  const Eigen::MatrixXd e0 =
      devectorize(data.design.transpose() * data.responses, data.p1, data.p2) /
      static_cast<double>(data.n);
  const TruncatedSvd svd = truncated_svd(w.w1_inv * e0 * w.w2_inv, 0.0);
  return svd.rank() == 0 ? 0.0 : svd.singular_values(0);
}

}  // namespace antrace
