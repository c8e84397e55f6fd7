#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asr/linops.hpp"
#include "asr/types.hpp"

namespace asr {

// Analysis operator D* (p x n) together with its synthesis side D = (D*)^T.
// is_tight means D D* = I_n; the 2D difference operator reuses this struct
// with is_tight = false and certification refuses it.
struct TightFrame {
  Index n = 0;                          // signal dimension
  Index p = 0;                          // analysis dimension, p >= n when tight
  LinearOperator d_star;                // maps n-vector to p-vector
  bool is_tight = false;
  std::optional<Matrix> d_star_dense;   // p x n entries when available

  // D* x (analysis coefficients).
  Vector analyze(const Vector& x) const { return d_star.apply(x); }
  // D v (synthesis; adjoint of D* in the real case).
  Vector synthesize(const Vector& v) const { return d_star.apply_adjoint(v); }

  // Dense D* - throws when the frame is matrix-free.
  const Matrix& dense() const;
  // Dense D* D (p x p), used for the (1,1)-norm in the certificates.
  Matrix d_star_d() const;
};

struct CosparseSignal {
  Vector x;                    // unit-norm signal
  std::vector<Index> cosupport;  // indices where D* x vanishes
  Index l = 0;                 // |cosupport|
};

// D* = first n columns of Q from the QR factorization of a p x n Gaussian
// matrix; the R diagonal is forced nonnegative so a seed pins the frame.
TightFrame random_tight_frame(Index n, Index p, std::uint64_t seed);

// Stacked horizontal and vertical first differences with periodic
// boundaries on a rows x cols image (row-major vectorization). Output is
// [horizontal; vertical], 2*rows*cols entries; the adjoint is the negative
// periodic divergence. Not a tight frame.
LinearOperator difference_operator_2d(Index rows, Index cols);
TightFrame difference_frame_2d(Index rows, Index cols);

// Unit-norm x with D*x exactly zero on a uniformly drawn cosupport of size
// l: project a Gaussian draw onto null(D*_Lambda) via SVD. Degenerate draws
// (trivial null space) are retried a fixed number of times.
CosparseSignal cosparse_signal(const TightFrame& frame, Index l, std::uint64_t seed);

// Flat binary persistence (see io.hpp for the format).
void save_frame(const std::string& path, const TightFrame& frame);
TightFrame load_frame(const std::string& path);
void save_signal(const std::string& path, const CosparseSignal& sig);
CosparseSignal load_signal(const std::string& path);

}  // namespace asr
