#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "asr/frames.hpp"
#include "asr/linops.hpp"
#include "asr/rng.hpp"

using namespace asr;

namespace {

double max_abs_dds_minus_identity(const TightFrame& frame) {
  const Matrix& ds = frame.dense();
  Matrix dds = ds.transpose() * ds;  // D D* = (D*)^T D*
  return (dds - Matrix::Identity(frame.n, frame.n)).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("random_tight_frame: n=1, p=4 gives a unit vector") {
  TightFrame frame = random_tight_frame(1, 4, 42);
  CHECK(frame.is_tight);
  CHECK(frame.dense().col(0).norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(max_abs_dds_minus_identity(frame) < 1e-12);
}

TEST_CASE("random_tight_frame: square case is orthogonal both ways") {
  TightFrame frame = random_tight_frame(3, 3, 43);
  const Matrix& ds = frame.dense();
  CHECK((ds.transpose() * ds - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((ds * ds.transpose() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("random_tight_frame: paper-scale 120x144 tightness") {
  TightFrame frame = random_tight_frame(120, 144, 44);
  CHECK(max_abs_dds_minus_identity(frame) < 1e-10);
}

TEST_CASE("random_tight_frame: seed pins the frame bitwise") {
  TightFrame a = random_tight_frame(12, 16, 7);
  TightFrame b = random_tight_frame(12, 16, 7);
  CHECK(a.dense() == b.dense());
  TightFrame c = random_tight_frame(12, 16, 8);
  CHECK(a.dense() != c.dense());
}

TEST_CASE("random_tight_frame: p < n rejected") {
  CHECK_THROWS_AS(random_tight_frame(5, 4, 1), std::invalid_argument);
}

TEST_CASE("tight frame: synthesize(analyze(x)) returns x") {
  TightFrame frame = random_tight_frame(10, 14, 45);
  Rng rng(46);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x = rng.gaussian_vector(10);
    Vector back = frame.synthesize(frame.analyze(x));
    CHECK((back - x).norm() / x.norm() < 1e-10);
  }
}

TEST_CASE("difference_operator_2d: constant image maps to zero") {
  LinearOperator d = difference_operator_2d(4, 5);
  CHECK(d.out_dim() == 2 * 4 * 5);
  Vector constant = Vector::Constant(20, 3.7);
  CHECK(d.apply(constant).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("difference_operator_2d: periodic 2x2 hand case") {
  // image [[1,0],[0,0]]: first-row horizontal differences are [-1, 1]
  LinearOperator d = difference_operator_2d(2, 2);
  Vector image(4);
  image << 1, 0, 0, 0;
  Vector g = d.apply(image);
  CHECK(g[0] == -1.0);
  CHECK(g[1] == 1.0);
}

TEST_CASE("difference_operator_2d: adjoint consistency on an 8x8 image") {
  LinearOperator d = difference_operator_2d(8, 8);
  Rng rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x = rng.gaussian_vector(64);
    Vector y = rng.gaussian_vector(128);
    double lhs = d.apply(x).dot(y);
    double rhs = x.dot(d.apply_adjoint(y));
    CHECK(std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-30) < 1e-10);
  }
}

TEST_CASE("difference_operator_2d: spectral norm at most sqrt(8)") {
  LinearOperator d = difference_operator_2d(8, 8);
  double norm = spectral_norm(d, 300, 48);
  CHECK(norm <= std::sqrt(8.0) + 1e-9);
  CHECK(norm > 2.0);  // nontrivial operator
}

TEST_CASE("cosparse_signal: l=0 is a normalized unconstrained draw") {
  TightFrame frame = random_tight_frame(6, 9, 49);
  CosparseSignal sig = cosparse_signal(frame, 0, 50);
  CHECK(sig.x.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sig.cosupport.empty());
}

TEST_CASE("cosparse_signal: full cosupport on a square orthogonal frame fails") {
  TightFrame frame = random_tight_frame(5, 5, 51);
  CHECK_THROWS_AS(cosparse_signal(frame, 5, 52), std::runtime_error);
}

TEST_CASE("cosparse_signal: n=12, p=16, l=10 satisfies the cosupport exactly") {
  TightFrame frame = random_tight_frame(12, 16, 53);
  CosparseSignal sig = cosparse_signal(frame, 10, 54);
  CHECK(sig.x.norm() == doctest::Approx(1.0).epsilon(1e-12));
  Vector coeffs = frame.analyze(sig.x);
  double scale = coeffs.lpNorm<Eigen::Infinity>();
  REQUIRE(scale > 0.0);
  for (Index idx : sig.cosupport) CHECK(std::abs(coeffs[idx]) < 1e-10 * scale);
  Index zeros = 0;
  for (Index i = 0; i < coeffs.size(); ++i)
    if (std::abs(coeffs[i]) < 1e-10 * scale) ++zeros;
  CHECK(zeros >= 10);
}

TEST_CASE("cosparse_signal: deterministic given (frame, l, seed)") {
  TightFrame frame = random_tight_frame(12, 16, 55);
  CosparseSignal a = cosparse_signal(frame, 8, 56);
  CosparseSignal b = cosparse_signal(frame, 8, 56);
  CHECK(a.x == b.x);
  CHECK(a.cosupport == b.cosupport);
}

TEST_CASE("frame and signal binary round trip") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "asrtk_frames_test";
  fs::create_directories(dir);

  TightFrame frame = random_tight_frame(7, 11, 57);
  std::string frame_path = (dir / "frame.bin").string();
  save_frame(frame_path, frame);
  TightFrame loaded = load_frame(frame_path);
  CHECK(loaded.n == frame.n);
  CHECK(loaded.p == frame.p);
  CHECK(loaded.is_tight == frame.is_tight);
  CHECK(loaded.dense() == frame.dense());

  CosparseSignal sig = cosparse_signal(frame, 4, 58);
  std::string sig_path = (dir / "signal.bin").string();
  save_signal(sig_path, sig);
  CosparseSignal sig_loaded = load_signal(sig_path);
  CHECK(sig_loaded.x == sig.x);
  CHECK(sig_loaded.cosupport == sig.cosupport);

  fs::remove_all(dir);
}
