#include "asr/linops.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "asr/rng.hpp"

namespace asr {

LinearOperator::LinearOperator(Index in_dim, Index out_dim, ApplyFn apply,
                               ApplyFn apply_adjoint)
    : in_dim_(in_dim),
      out_dim_(out_dim),
      apply_(std::move(apply)),
      adjoint_(std::move(apply_adjoint)) {
  if (in_dim <= 0 || out_dim <= 0)
    throw std::invalid_argument("LinearOperator: dimensions must be positive");
}

Vector LinearOperator::apply(const Vector& x) const {
  if (!apply_) throw std::logic_error("LinearOperator::apply on empty operator");
  if (x.size() != in_dim_)
    throw std::invalid_argument("LinearOperator::apply: expected size " +
                                std::to_string(in_dim_) + ", got " +
                                std::to_string(x.size()));
  return apply_(x);
}

Vector LinearOperator::apply_adjoint(const Vector& y) const {
  if (!adjoint_) throw std::logic_error("LinearOperator::apply_adjoint on empty operator");
  if (y.size() != out_dim_)
    throw std::invalid_argument("LinearOperator::apply_adjoint: expected size " +
                                std::to_string(out_dim_) + ", got " +
                                std::to_string(y.size()));
  return adjoint_(y);
}

LinearOperator LinearOperator::identity(Index n) {
  auto id = [](const Vector& x) { return x; };
  return LinearOperator(n, n, id, id);
}

LinearOperator LinearOperator::scaled_identity(Index n, double c) {
  auto f = [c](const Vector& x) -> Vector { return c * x; };
  return LinearOperator(n, n, f, f);
}

LinearOperator LinearOperator::from_matrix(Matrix m) {
  auto shared = std::make_shared<const Matrix>(std::move(m));
  LinearOperator op(
      shared->cols(), shared->rows(),
      [shared](const Vector& x) -> Vector { return (*shared) * x; },
      [shared](const Vector& y) -> Vector { return shared->transpose() * y; });
  op.dense_ = shared;
  return op;
}

LinearOperator compose(const LinearOperator& f, const LinearOperator& g) {
  if (f.in_dim() != g.out_dim())
    throw std::invalid_argument("compose: inner dimensions mismatch (" +
                                std::to_string(f.in_dim()) + " vs " +
                                std::to_string(g.out_dim()) + ")");
  return LinearOperator(
      g.in_dim(), f.out_dim(),
      [f, g](const Vector& x) { return f.apply(g.apply(x)); },
      [f, g](const Vector& y) { return g.apply_adjoint(f.apply_adjoint(y)); });
}

double spectral_norm(const LinearOperator& op, int iters, std::uint64_t seed) {
  if (iters < 1) throw std::invalid_argument("spectral_norm: iters must be >= 1");
  Rng rng(seed);
  Vector v = rng.gaussian_vector(op.in_dim());
  double vnorm = v.norm();
  if (vnorm == 0.0) v.setConstant(1.0), vnorm = v.norm();
  v /= vnorm;
  double rayleigh = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vector bv = op.apply_adjoint(op.apply(v));
    rayleigh = v.dot(bv);
    double bnorm = bv.norm();
    if (bnorm == 0.0) return 0.0;  // zero operator (or v in the kernel)
    v = bv / bnorm;
  }
  return std::sqrt(std::max(rayleigh, 0.0));
}

double norm_11(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace asr
