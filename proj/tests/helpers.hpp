#pragma once

#include <Eigen/Eigenvalues>

#include "asr/frames.hpp"
#include "asr/linops.hpp"
#include "asr/prox.hpp"
#include "asr/rng.hpp"
#include "asr/solvers.hpp"

namespace asr::testing {

inline TightFrame identity_frame(Index n) {
  TightFrame frame;
  frame.n = n;
  frame.p = n;
  frame.is_tight = true;
  frame.d_star_dense = Matrix::Identity(n, n);
  frame.d_star = LinearOperator::from_matrix(Matrix::Identity(n, n));
  return frame;
}

// 0.5*||Ax - b||^2 + tau*||x||_1 as a CompositeProblem with an exact
// Lipschitz bound from the dense Gram spectrum.
inline CompositeProblem lasso_composite(const Matrix& a, const Vector& b, double tau) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a);
  CompositeProblem problem;
  problem.lipschitz_bound = eig.eigenvalues().maxCoeff();
  problem.smooth_value = [a, b](const Vector& x) {
    return 0.5 * (a * x - b).squaredNorm();
  };
  problem.smooth_grad = [a, b](const Vector& x) -> Vector {
    return a.transpose() * (a * x - b);
  };
  problem.prox_nonsmooth = [tau](const Vector& v, double step) {
    return soft_threshold(v, tau * step);
  };
  problem.nonsmooth_value = [tau](const Vector& x) { return tau * x.lpNorm<1>(); };
  return problem;
}

}  // namespace asr::testing
