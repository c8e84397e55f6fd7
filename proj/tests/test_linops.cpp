#include <doctest.h>

#include <Eigen/SVD>

#include "asr/linops.hpp"
#include "asr/rng.hpp"

using namespace asr;

namespace {

// Shared invariant: <M u, v> == <u, M^T v> on random pairs.
void check_adjoint_consistency(const LinearOperator& op, std::uint64_t seed,
                               double rel_tol = 1e-10) {
  Rng rng(seed);
  for (int trial = 0; trial < 20; ++trial) {
    Vector u = rng.gaussian_vector(op.in_dim());
    Vector v = rng.gaussian_vector(op.out_dim());
    double lhs = op.apply(u).dot(v);
    double rhs = u.dot(op.apply_adjoint(v));
    double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-30});
    CHECK(std::abs(lhs - rhs) / scale < rel_tol);
  }
}

}  // namespace

TEST_CASE("compose: identity chain is the identity") {
  LinearOperator id3 = LinearOperator::identity(3);
  Vector x(3);
  x << 1, 2, 3;
  Vector y = compose(id3, id3).apply(x);
  CHECK(y.isApprox(x, 0.0));
}

TEST_CASE("compose: scaled identities commute to the product scale") {
  LinearOperator two = LinearOperator::scaled_identity(4, 2.0);
  LinearOperator three = LinearOperator::scaled_identity(4, 3.0);
  Rng rng(7);
  Vector x = rng.gaussian_vector(4);
  CHECK(compose(two, three).apply(x).isApprox(6.0 * x, 1e-15));
  CHECK(compose(three, two).apply(x).isApprox(6.0 * x, 1e-15));
}

TEST_CASE("compose: matches the dense matrix product") {
  Rng rng(11);
  Matrix m = rng.gaussian_matrix(4, 3);
  Matrix n = rng.gaussian_matrix(3, 5);
  LinearOperator composed =
      compose(LinearOperator::from_matrix(m), LinearOperator::from_matrix(n));
  Matrix product = m * n;  // oracle: dense multiply
  Vector x = rng.gaussian_vector(5);
  CHECK(composed.apply(x).isApprox(product * x, 1e-13));
  Vector y = rng.gaussian_vector(4);
  CHECK(composed.apply_adjoint(y).isApprox(product.transpose() * y, 1e-13));
  check_adjoint_consistency(composed, 13);
}

TEST_CASE("compose: dimension mismatch throws") {
  LinearOperator a = LinearOperator::identity(3);
  LinearOperator b = LinearOperator::identity(4);
  CHECK_THROWS_AS(compose(a, b), std::invalid_argument);
}

TEST_CASE("spectral_norm: identity on R^5") {
  CHECK(spectral_norm(LinearOperator::identity(5), 50, 1) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spectral_norm: diagonal operator") {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3.0, 1.0, 0.5;
  double est = spectral_norm(LinearOperator::from_matrix(d), 200, 2);
  CHECK(est == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("spectral_norm: matches dense SVD on a random 8x6 matrix") {
  Rng rng(21);
  Matrix m = rng.gaussian_matrix(8, 6);
  double truth = Eigen::JacobiSVD<Matrix>(m).singularValues()[0];  // oracle
  double est = spectral_norm(LinearOperator::from_matrix(m), 200, 3);
  CHECK(std::abs(est - truth) / truth < 1e-8);
}

TEST_CASE("spectral_norm: nondecreasing in iterations, below Frobenius norm") {
  Rng rng(33);
  Matrix m = rng.gaussian_matrix(7, 7);
  LinearOperator op = LinearOperator::from_matrix(m);
  double prev = 0.0;
  for (int iters = 1; iters <= 40; ++iters) {
    double est = spectral_norm(op, iters, 5);
    CHECK(est >= prev - 1e-13);
    CHECK(est <= m.norm() + 1e-13);  // Frobenius bound
    prev = est;
  }
}

TEST_CASE("spectral_norm: zero operator reports 0") {
  CHECK(spectral_norm(LinearOperator::from_matrix(Matrix::Zero(4, 4)), 10, 9) == 0.0);
}

TEST_CASE("norm_11: identity and hand-evaluated matrix") {
  CHECK(norm_11(Matrix::Identity(4, 4)) == 1.0);
  Matrix m(2, 2);
  m << 1, -2, 3, 4;
  CHECK(norm_11(m) == 6.0);  // column sums {4, 6}
}

TEST_CASE("norm_11: matches the basis-vector oracle on D*D") {
  Rng rng(44);
  Matrix d_star = rng.gaussian_matrix(8, 6);
  Matrix dsd = d_star * d_star.transpose();  // p x p
  double oracle = 0.0;
  for (Index i = 0; i < dsd.cols(); ++i) {
    Vector e = Vector::Zero(dsd.cols());
    e[i] = 1.0;
    oracle = std::max(oracle, (dsd * e).lpNorm<1>());
  }
  CHECK(norm_11(dsd) == doctest::Approx(oracle).epsilon(1e-14));
}

TEST_CASE("adjoint consistency holds for constructed operators") {
  Rng rng(55);
  check_adjoint_consistency(LinearOperator::identity(6), 60);
  check_adjoint_consistency(LinearOperator::from_matrix(rng.gaussian_matrix(9, 4)), 61);
  check_adjoint_consistency(
      compose(LinearOperator::from_matrix(rng.gaussian_matrix(3, 7)),
              LinearOperator::from_matrix(rng.gaussian_matrix(7, 5))),
      62);
}

TEST_CASE("linearity of dense-backed operators") {
  Rng rng(66);
  LinearOperator op = LinearOperator::from_matrix(rng.gaussian_matrix(5, 5));
  Vector u = rng.gaussian_vector(5);
  Vector v = rng.gaussian_vector(5);
  double a = rng.normal(), b = rng.normal();
  Vector lhs = op.apply(a * u + b * v);
  Vector rhs = a * op.apply(u) + b * op.apply(v);
  CHECK((lhs - rhs).norm() / std::max(rhs.norm(), 1e-30) < 1e-10);
}
