#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace asr {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Concrete dense backing for linear operators: row-major storage is what the
// flat binary format persists, Eigen-native column-major is what the solvers
// consume. DenseMatrix is the interchange alias.
using DenseMatrix = Matrix;

inline constexpr const char* kVersion = "0.1.0";

}  // namespace asr
