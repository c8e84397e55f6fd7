#include "asr/frames.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "asr/rng.hpp"

namespace asr {

const Matrix& TightFrame::dense() const {
  if (!d_star_dense)
    throw std::runtime_error("TightFrame: no dense analysis matrix available");
  return *d_star_dense;
}

Matrix TightFrame::d_star_d() const {
  const Matrix& ds = dense();
  return ds * ds.transpose();
}

TightFrame random_tight_frame(Index n, Index p, std::uint64_t seed) {
  if (n < 1 || p < n)
    throw std::invalid_argument("random_tight_frame: need p >= n >= 1");
  Rng rng(seed);
  Matrix g = rng.gaussian_matrix(p, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(p, n);
  Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  // Pin the QR sign ambiguity: nonnegative R diagonal.
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;

  TightFrame frame;
  frame.n = n;
  frame.p = p;
  frame.is_tight = true;
  frame.d_star_dense = q;
  frame.d_star = LinearOperator::from_matrix(q);
  return frame;
}

LinearOperator difference_operator_2d(Index rows, Index cols) {
  if (rows < 2 || cols < 2)
    throw std::invalid_argument("difference_operator_2d: need rows, cols >= 2");
  const Index npix = rows * cols;
  auto at = [cols](Index i, Index j) { return i * cols + j; };

  auto forward = [rows, cols, npix, at](const Vector& x) -> Vector {
    Vector g(2 * npix);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) {
        Index jn = (j + 1 == cols) ? 0 : j + 1;
        Index in = (i + 1 == rows) ? 0 : i + 1;
        g[at(i, j)] = x[at(i, jn)] - x[at(i, j)];           // horizontal
        g[npix + at(i, j)] = x[at(in, j)] - x[at(i, j)];    // vertical
      }
    return g;
  };

  auto adjoint = [rows, cols, npix, at](const Vector& g) -> Vector {
    Vector x = Vector::Zero(npix);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) {
        Index jp = (j == 0) ? cols - 1 : j - 1;
        Index ip = (i == 0) ? rows - 1 : i - 1;
        x[at(i, j)] += g[at(i, jp)] - g[at(i, j)];
        x[at(i, j)] += g[npix + at(ip, j)] - g[npix + at(i, j)];
      }
    return x;
  };

  return LinearOperator(npix, 2 * npix, forward, adjoint);
}

TightFrame difference_frame_2d(Index rows, Index cols) {
  TightFrame frame;
  frame.n = rows * cols;
  frame.p = 2 * rows * cols;
  frame.is_tight = false;
  frame.d_star = difference_operator_2d(rows, cols);
  return frame;
}

CosparseSignal cosparse_signal(const TightFrame& frame, Index l, std::uint64_t seed) {
  if (l < 0 || l > frame.p)
    throw std::invalid_argument("cosparse_signal: l must be in [0, p]");
  Rng rng(seed);

  if (l == 0) {
    Vector x = rng.gaussian_vector(frame.n);
    double nrm = x.norm();
    if (nrm == 0.0) throw std::runtime_error("cosparse_signal: degenerate Gaussian draw");
    CosparseSignal sig;
    sig.x = x / nrm;
    sig.l = 0;
    return sig;
  }

  const Matrix& d_star = frame.dense();
  const int kMaxAttempts = 20;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<Index> cosupport = rng.subset(frame.p, l);
    Matrix rows(l, frame.n);
    for (Index r = 0; r < l; ++r)
      rows.row(r) = d_star.row(cosupport[static_cast<std::size_t>(r)]);

    Eigen::JacobiSVD<Matrix> svd(rows, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double tol = 1e-12 * (sv.size() > 0 ? sv[0] : 0.0);
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
      if (sv[i] > tol) ++rank;
    Index null_dim = frame.n - rank;
    if (null_dim <= 0) continue;  // trivial null space, retry with a fresh draw

    Matrix basis = svd.matrixV().rightCols(null_dim);
    Vector coeffs = rng.gaussian_vector(null_dim);
    Vector x = basis * coeffs;
    double nrm = x.norm();
    if (nrm <= 1e-14) continue;
    CosparseSignal sig;
    sig.x = x / nrm;
    sig.cosupport = std::move(cosupport);
    sig.l = l;
    return sig;
  }
  char msg[160];
  std::snprintf(msg, sizeof(msg),
                "cosparse_signal: no cosupport of size %lld with nontrivial "
                "null(D*_Lambda) found in %d attempts (n=%lld, p=%lld)",
                static_cast<long long>(l), kMaxAttempts,
                static_cast<long long>(frame.n), static_cast<long long>(frame.p));
  throw std::runtime_error(msg);
}

void save_frame(const std::string& path, const TightFrame& frame) {
  const Matrix& ds = frame.dense();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  std::int64_t header[3] = {frame.n, frame.p, frame.is_tight ? 1 : 0};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  for (Index i = 0; i < ds.rows(); ++i)
    for (Index j = 0; j < ds.cols(); ++j) {
      double x = ds(i, j);
      out.write(reinterpret_cast<const char*>(&x), sizeof(x));
    }
}

TightFrame load_frame(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::int64_t header[3];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw std::runtime_error("load_frame: truncated header in " + path);
  TightFrame frame;
  frame.n = header[0];
  frame.p = header[1];
  frame.is_tight = header[2] != 0;
  Matrix ds(frame.p, frame.n);
  for (Index i = 0; i < frame.p; ++i)
    for (Index j = 0; j < frame.n; ++j) {
      double x = 0;
      in.read(reinterpret_cast<char*>(&x), sizeof(x));
      if (!in) throw std::runtime_error("load_frame: truncated data in " + path);
      ds(i, j) = x;
    }
  frame.d_star_dense = ds;
  frame.d_star = LinearOperator::from_matrix(std::move(ds));
  return frame;
}

void save_signal(const std::string& path, const CosparseSignal& sig) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  std::int64_t header[2] = {sig.x.size(), sig.l};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(sig.x.data()),
            static_cast<std::streamsize>(sizeof(double)) * sig.x.size());
  for (Index idx : sig.cosupport) {
    std::int64_t v = idx;
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
}

CosparseSignal load_signal(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::int64_t header[2];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw std::runtime_error("load_signal: truncated header in " + path);
  CosparseSignal sig;
  sig.x.resize(header[0]);
  sig.l = header[1];
  in.read(reinterpret_cast<char*>(sig.x.data()),
          static_cast<std::streamsize>(sizeof(double)) * sig.x.size());
  sig.cosupport.resize(static_cast<std::size_t>(sig.l));
  for (auto& idx : sig.cosupport) {
    std::int64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("load_signal: truncated data in " + path);
    idx = v;
  }
  return sig;
}

}  // namespace asr
