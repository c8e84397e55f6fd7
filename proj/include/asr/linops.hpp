#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

#include "asr/types.hpp"

namespace asr {

// Real linear map with an explicit adjoint. Operators are immutable after
// construction; apply/apply_adjoint are pure, so one operator can be shared
// across concurrent solver runs.
class LinearOperator {
 public:
  using ApplyFn = std::function<Vector(const Vector&)>;

  // Empty operator; any use throws. Exists so containers and structs can be
  // built before the operator is known.
  LinearOperator() = default;
  LinearOperator(Index in_dim, Index out_dim, ApplyFn apply, ApplyFn apply_adjoint);

  Index in_dim() const { return in_dim_; }
  Index out_dim() const { return out_dim_; }

  // y = M x  (x has in_dim entries, y has out_dim entries)
  Vector apply(const Vector& x) const;
  // x = M^T y
  Vector apply_adjoint(const Vector& y) const;

  // Dense matrix backing, if this operator was built from one.
  const Matrix* dense() const { return dense_ ? dense_.get() : nullptr; }

  static LinearOperator identity(Index n);
  static LinearOperator from_matrix(Matrix m);
  static LinearOperator scaled_identity(Index n, double c);

 private:
  Index in_dim_ = 0;
  Index out_dim_ = 0;
  ApplyFn apply_;
  ApplyFn adjoint_;
  std::shared_ptr<const Matrix> dense_;
};

// result = f after g:  result(x) = f(g(x)). Requires f.in_dim == g.out_dim.
LinearOperator compose(const LinearOperator& f, const LinearOperator& g);

// Largest-singular-value estimate by power iteration on op^T op with a
// seeded start vector. The estimate is nondecreasing in `iters` and never
// exceeds the true norm; callers that need a certified upper bound multiply
// by a small safety factor (see solvers::lipschitz_safety).
double spectral_norm(const LinearOperator& op, int iters, std::uint64_t seed);

// Induced (1,1) norm: max over columns of the column's absolute sum.
double norm_11(const Matrix& m);

}  // namespace asr
