#include "asr/certify.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>

#include "asr/io.hpp"
#include "asr/parallel.hpp"
#include "asr/rng.hpp"

namespace asr {

namespace {

constexpr std::int64_t kEnumerationBudget = 1000000;
constexpr double kRankTol = 1e-12;

// Worst deviation of ||A v||^2 / ||v||^2 from 1 over range(D_T).
double support_deviation(const LinearOperator& A, const Matrix& d_cols) {
  Eigen::JacobiSVD<Matrix> svd(d_cols, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  double tol = kRankTol * (sv.size() > 0 ? sv[0] : 0.0);
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol) ++rank;
  if (rank == 0) return 0.0;  // D_T = 0 spans nothing

  Matrix q = svd.matrixU().leftCols(rank);
  Matrix aq(A.out_dim(), rank);
  for (Index j = 0; j < rank; ++j) aq.col(j) = A.apply(q.col(j));
  Matrix gram = aq.transpose() * aq;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  double lo = eig.eigenvalues().minCoeff();
  double hi = eig.eigenvalues().maxCoeff();
  return std::max(hi - 1.0, 1.0 - lo);
}

Matrix columns_of_d(const Matrix& d_star, const std::vector<Index>& support) {
  // D = (D*)^T, so column j of D is row j of D* transposed.
  Matrix cols(d_star.cols(), static_cast<Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k)
    cols.col(static_cast<Index>(k)) = d_star.row(support[k]).transpose();
  return cols;
}

// Draws x in the s-sparse synthesis set: D times an s-sparse coefficient vector.
Vector sample_sigma_s(const TightFrame& frame, int s, Rng& rng) {
  std::vector<Index> support = rng.subset(frame.p, s);
  Vector coeffs = rng.gaussian_vector(s);
  Vector z = Vector::Zero(frame.p);
  for (int k = 0; k < s; ++k) z[support[static_cast<std::size_t>(k)]] = coeffs[k];
  return frame.synthesize(z);
}

}  // namespace

std::int64_t binomial_or_limit(Index n, Index k, std::int64_t limit) {
  if (k < 0 || k > n) return 0;
  std::int64_t result = 1;
  for (Index i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > limit) return limit + 1;
  }
  return result;
}

std::vector<Index> top_s_indices(const Vector& v, int s) {
  std::vector<Index> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    double ma = std::abs(v[a]), mb = std::abs(v[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  });
  int count = std::min<int>(s, static_cast<int>(order.size()));
  std::vector<Index> out(order.begin(), order.begin() + count);
  std::sort(out.begin(), out.end());
  return out;
}

double tail_l1(const Vector& v, int s) {
  std::vector<double> mags(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(v[i]);
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  double tail = 0.0;
  for (std::size_t i = static_cast<std::size_t>(std::min<Index>(s, v.size()));
       i < mags.size(); ++i)
    tail += mags[i];
  return tail;
}

DripEstimate drip_exhaustive(const LinearOperator& A, const TightFrame& frame, int s,
                             int num_threads) {
  if (s < 1 || s > frame.p) throw std::invalid_argument("drip_exhaustive: bad s");
  std::int64_t count = binomial_or_limit(frame.p, s, kEnumerationBudget);
  if (count > kEnumerationBudget)
    throw std::runtime_error(
        "drip_exhaustive: C(p, s) exceeds the enumeration budget; use "
        "drip_randomized_lb instead");

  const Matrix& d_star = frame.dense();

  // Materialize all supports first so the parallel max-reduction is a plain
  // indexed loop.
  std::vector<std::vector<Index>> supports;
  supports.reserve(static_cast<std::size_t>(count));
  std::vector<Index> current(static_cast<std::size_t>(s));
  std::iota(current.begin(), current.end(), Index{0});
  while (true) {
    supports.push_back(current);
    int i = s - 1;
    while (i >= 0 && current[static_cast<std::size_t>(i)] == frame.p - s + i) --i;
    if (i < 0) break;
    ++current[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < s; ++j)
      current[static_cast<std::size_t>(j)] = current[static_cast<std::size_t>(j - 1)] + 1;
  }

  std::vector<double> deviations(supports.size(), 0.0);
  parallel_for(supports.size(), num_threads, [&](std::size_t i) {
    deviations[i] = support_deviation(A, columns_of_d(d_star, supports[i]));
  });

  DripEstimate est;
  est.s = s;
  est.method = DripEstimate::Method::kExhaustive;
  est.supports_checked = static_cast<std::int64_t>(supports.size());
  est.sigma_s = deviations.empty() ? 0.0
                                   : *std::max_element(deviations.begin(), deviations.end());
  return est;
}

DripEstimate drip_randomized_lb(const LinearOperator& A, const TightFrame& frame,
                                int s, int trials, std::uint64_t seed) {
  if (s < 1 || s > frame.p) throw std::invalid_argument("drip_randomized_lb: bad s");
  if (trials < 1) throw std::invalid_argument("drip_randomized_lb: trials must be >= 1");
  const Matrix& d_star = frame.dense();
  Rng rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<Index> support = rng.subset(frame.p, s);
    worst = std::max(worst, support_deviation(A, columns_of_d(d_star, support)));
  }
  DripEstimate est;
  est.s = s;
  est.method = DripEstimate::Method::kRandomizedLowerBound;
  est.supports_checked = trials;
  est.sigma_s = worst;
  return est;
}

BoundConstants bound_constants(double sigma_2s, double d_star_d_norm11) {
  BoundConstants out;
  out.c0 = 0.5 + d_star_d_norm11;
  double denom = 1.0 - (1.0 + 3.0 * std::sqrt(2.0)) * sigma_2s;
  if (!(sigma_2s >= 0.0) || denom <= 0.0) {
    out.feasible = false;
    out.C0 = out.C1 = out.C2 = std::numeric_limits<double>::infinity();
    return out;
  }
  out.feasible = true;
  double numer = (std::sqrt(2.0) - 1.0) * sigma_2s + 1.0;
  out.C0 = 4.0 * std::sqrt(2.0) * out.c0 / denom;
  out.C1 = 4.0 * numer / denom;
  out.C2 = numer / denom;
  return out;
}

double optimality_certificate(const AnalysisProblem& problem, const Vector& x_hat,
                              double /*rho*/) {
  // The combined stationarity conditions give A^T(A x_hat - b) = lambda*D*v
  // with ||v||_inf <= 1, independent of rho, hence the scale below.
  Vector resid = problem.A.apply(x_hat) - problem.b;
  double lhs = problem.frame.analyze(problem.A.apply_adjoint(resid)).lpNorm<Eigen::Infinity>();
  double scale = problem.lambda * norm_11(problem.frame.d_star_d());
  return lhs / scale;
}

double cone_certificate(const AnalysisProblem& problem, const Vector& x_true,
                        const Vector& x_hat, double rho, int s) {
  Vector dx = problem.frame.analyze(x_true);
  Vector dh = problem.frame.analyze(x_hat - x_true);
  std::vector<Index> top = top_s_indices(dx, s);
  std::vector<char> on_top(static_cast<std::size_t>(problem.frame.p), 0);
  for (Index i : top) on_top[static_cast<std::size_t>(i)] = 1;

  double lhs = 0.0, dh_top = 0.0, dx_tail = 0.0;
  for (Index i = 0; i < problem.frame.p; ++i) {
    if (on_top[static_cast<std::size_t>(i)]) {
      dh_top += std::abs(dh[i]);
    } else {
      lhs += std::abs(dh[i]);
      dx_tail += std::abs(dx[i]);
    }
  }
  double rhs = problem.lambda * static_cast<double>(problem.frame.p) / rho +
               3.0 * dh_top + 4.0 * dx_tail;
  return rhs - lhs;
}

CertificateReport error_bound(const AnalysisProblem& problem, const Vector& x_true,
                              const Vector& x_hat, double rho, int s,
                              const DripEstimate& drip) {
  if (!problem.frame.is_tight)
    throw std::invalid_argument(
        "error_bound: the recovery bound assumes a tight frame; refusing a "
        "non-tight analysis operator");
  if (drip.s != 2 * s)
    throw std::invalid_argument("error_bound: drip estimate must be at level 2s");

  CertificateReport report;
  report.s = s;
  report.lambda = problem.lambda;
  report.rho = rho;
  report.sigma_2s = drip.sigma_s;

  BoundConstants constants = bound_constants(drip.sigma_s, norm_11(problem.frame.d_star_d()));
  report.feasible = constants.feasible;
  report.c0 = constants.c0;
  report.C0 = constants.C0;
  report.C1 = constants.C1;
  report.C2 = constants.C2;

  Vector w = problem.b - problem.A.apply(x_true);
  report.noise_condition_lhs =
      problem.frame.analyze(problem.A.apply_adjoint(w)).lpNorm<Eigen::Infinity>();
  report.noise_condition_ok = report.noise_condition_lhs <= problem.lambda / 2.0;

  double sqrt_s = std::sqrt(static_cast<double>(s));
  double tail = tail_l1(problem.frame.analyze(x_true), s);
  double third = std::isinf(rho)
                     ? 0.0
                     : report.C2 * problem.lambda * static_cast<double>(problem.frame.p) /
                           (sqrt_s * rho);
  report.predicted_bound =
      constants.feasible
          ? report.C0 * sqrt_s * problem.lambda + report.C1 * tail / sqrt_s + third
          : std::numeric_limits<double>::infinity();
  report.measured_error = (x_hat - x_true).norm();
  report.optimality_residual = optimality_certificate(problem, x_hat, rho);
  report.cone_slack = cone_certificate(problem, x_true, x_hat, rho, s);
  return report;
}

IterationEstimate iteration_estimates(double L_g, double L_grad_f, double Lambda,
                                      double eps, double H_x0, double d_norm2) {
  if (!(L_g > 0.0) || !(L_grad_f > 0.0) || !(Lambda > 0.0) || !(eps > 0.0) ||
      !(H_x0 > 0.0) || !(d_norm2 > 0.0))
    throw std::invalid_argument("iteration_estimates: all inputs must be positive");

  IterationEstimate est;
  est.target_eps = eps;

  est.K_smoothing = 2.0 * d_norm2 * std::sqrt(L_g * Lambda) / eps +
                    std::sqrt(L_grad_f * Lambda) / std::sqrt(eps);
  double d2Lg = d_norm2 * d_norm2 * L_g;
  est.mu_star = std::sqrt(d_norm2 * d_norm2 / L_g) * eps /
                (std::sqrt(d2Lg) + std::sqrt(d2Lg + L_grad_f * eps));

  double d2 = d_norm2 * d_norm2;
  est.K_decomposition =
      std::max(16.0 * std::sqrt((1.0 + d2) * Lambda * H_x0) * L_g / std::pow(eps, 1.5),
               2.0 * std::sqrt(L_grad_f * Lambda) / std::sqrt(eps));
  est.rho_star = std::pow(L_g * std::sqrt(2.0 * H_x0) * est.K_decomposition *
                              est.K_decomposition / (2.0 * (1.0 + d2) * Lambda),
                          2.0 / 3.0);
  return est;
}

double drip_pair_slack(const LinearOperator& A, double sigma_2s, const Vector& u,
                       const Vector& v) {
  double lhs = A.apply(u).dot(A.apply(v));
  double rhs = -sigma_2s * u.norm() * v.norm() + u.dot(v);
  return lhs - rhs;
}

double drip_inner_product_check(const LinearOperator& A, const TightFrame& frame,
                                int s, int trials, std::uint64_t seed) {
  DripEstimate drip = drip_exhaustive(A, frame, 2 * s);
  Rng rng(seed);
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < trials; ++trial) {
    Vector u = sample_sigma_s(frame, s, rng);
    Vector v = sample_sigma_s(frame, s, rng);
    worst = std::min(worst, drip_pair_slack(A, drip.sigma_s, u, v));
  }
  return worst;
}

double drip_property_slack(const AnalysisProblem& problem, const Vector& x_true,
                           const Vector& x_hat, int s, double sigma_2s) {
  const TightFrame& frame = problem.frame;
  Vector h = x_hat - x_true;
  Vector dx = frame.analyze(x_true);
  Vector dh = frame.analyze(h);

  std::vector<Index> t0 = top_s_indices(dx, s);
  std::vector<char> in_t0(static_cast<std::size_t>(frame.p), 0);
  for (Index i : t0) in_t0[static_cast<std::size_t>(i)] = 1;

  // T1: s largest |D*h| outside T0.
  Vector dh_off = dh;
  for (Index i : t0) dh_off[i] = 0.0;
  std::vector<Index> t1 = top_s_indices(dh_off, s);

  Vector dh_t01 = Vector::Zero(frame.p);
  for (Index i : t0) dh_t01[i] = dh[i];
  for (Index i : t1)
    if (!in_t0[static_cast<std::size_t>(i)]) dh_t01[i] = dh[i];

  double tail_norm1 = 0.0;
  for (Index i = 0; i < frame.p; ++i)
    if (!in_t0[static_cast<std::size_t>(i)]) tail_norm1 += std::abs(dh[i]);

  double lhs = problem.A.apply(h).dot(problem.A.apply(frame.synthesize(dh_t01)));
  double t01_norm = dh_t01.norm();
  double rhs = (1.0 - sigma_2s) * t01_norm * t01_norm -
               std::sqrt(2.0 / static_cast<double>(s)) * sigma_2s * t01_norm * tail_norm1;
  return lhs - rhs;
}

std::string CertificateReport::to_text() const {
  std::ostringstream out;
  out << "recovery certificate (s = " << s << ", lambda = " << format_double(lambda)
      << ", rho = " << format_double(rho) << ")\n";
  out << "  sigma_2s            = " << format_double(sigma_2s)
      << (feasible ? "  (< 0.190743..., bound applies)" : "  (infeasible: >= 1/(1+3*sqrt(2)))")
      << "\n";
  out << "  c0                  = " << format_double(c0) << "\n";
  out << "  C0, C1, C2          = " << format_double(C0) << ", " << format_double(C1)
      << ", " << format_double(C2) << "\n";
  out << "  noise ||D*A^Tw||inf = " << format_double(noise_condition_lhs)
      << (noise_condition_ok ? "  (<= lambda/2)" : "  (VIOLATES lambda/2)") << "\n";
  out << "  predicted bound     = " << format_double(predicted_bound) << "\n";
  out << "  measured ||x-x^||   = " << format_double(measured_error) << "\n";
  out << "  optimality residual = " << format_double(optimality_residual) << "\n";
  out << "  cone slack          = " << format_double(cone_slack) << "\n";
  return out.str();
}

void CertificateReport::to_csv(const std::string& path) const {
  CsvTable table;
  table.columns = {"sigma_2s",       "c0",
                   "C0",             "C1",
                   "C2",             "predicted_bound",
                   "measured_error", "noise_condition_lhs",
                   "optimality_residual", "cone_slack",
                   "feasible",       "s",
                   "lambda",         "rho"};
  table.rows.push_back({sigma_2s, c0, C0, C1, C2, predicted_bound, measured_error,
                        noise_condition_lhs, optimality_residual, cone_slack,
                        feasible ? 1.0 : 0.0, static_cast<double>(s), lambda, rho});
  write_csv(path, table);
}

}  // namespace asr
