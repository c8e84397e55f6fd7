#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asr/frames.hpp"
#include "asr/linops.hpp"
#include "asr/solvers.hpp"
#include "asr/types.hpp"

namespace asr {

// Exact feasibility threshold for the recovery bound; the literature rounds
// it to 0.1907.
inline constexpr double kSigmaFeasibleLimit = 0.19074356983054619;  // 1/(1+3*sqrt(2))

struct DripEstimate {
  enum class Method { kExhaustive, kRandomizedLowerBound };
  int s = 0;
  double sigma_s = 0.0;
  Method method = Method::kExhaustive;
  std::int64_t supports_checked = 0;
};

struct BoundConstants {
  bool feasible = false;  // sigma_2s < 1/(1+3*sqrt(2))
  double c0 = 0.0;        // 1/2 + ||D*D||_{1,1}
  double C0 = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
};

struct CertificateReport {
  double sigma_2s = 0.0;
  double c0 = 0.0;
  double C0 = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double predicted_bound = 0.0;
  double measured_error = 0.0;
  double noise_condition_lhs = 0.0;  // ||D* A^T w||_inf, compared against lambda/2
  bool noise_condition_ok = false;
  double optimality_residual = 0.0;  // ratio from optimality_certificate
  double cone_slack = 0.0;
  bool feasible = false;
  int s = 0;
  double lambda = 0.0;
  double rho = 0.0;  // +inf marks the exact-l1 limit (two-term bound)

  std::string to_text() const;
  void to_csv(const std::string& path) const;
};

struct IterationEstimate {
  double target_eps = 0.0;
  double K_smoothing = 0.0;
  double mu_star = 0.0;
  double K_decomposition = 0.0;
  double rho_star = 0.0;
};

// Exact restricted-isometry constant adapted to the frame: enumerates every
// size-s column support T of D, builds an orthonormal basis of range(D_T)
// (rank-revealing, tolerance 1e-12), and takes the worst eigenvalue
// deviation of Q^T A^T A Q from 1. Refuses supports counts above 10^6.
DripEstimate drip_exhaustive(const LinearOperator& A, const TightFrame& frame, int s,
                             int num_threads = 0);

// Same per-support quantity over `trials` uniformly sampled supports. The
// result never exceeds the exhaustive constant (it is a lower bound).
DripEstimate drip_randomized_lb(const LinearOperator& A, const TightFrame& frame,
                                int s, int trials, std::uint64_t seed);

// Closed-form constants of the recovery bound at a given sigma_2s.
BoundConstants bound_constants(double sigma_2s, double d_star_d_norm11);

// Evaluates the recovery bound
//   ||x_hat - x_true|| <= C0*sqrt(s)*lambda + C1*||D*x - (D*x)_s||_1/sqrt(s)
//                          + C2*lambda*p/(sqrt(s)*rho)
// against the measured error, and bundles the lemma-level diagnostics.
// Smoothed runs pass rho = 1/mu; rho = +inf drops the third term (exact-l1
// limit). Requires a tight frame; drip must be taken at level 2s.
CertificateReport error_bound(const AnalysisProblem& problem, const Vector& x_true,
                              const Vector& x_hat, double rho, int s,
                              const DripEstimate& drip);

// First-order optimality residual ratio
//   ||D* A^T (A x_hat - b)||_inf / (lambda * ||D*D||_{1,1});
// at an exact minimizer the ratio is <= 1 for any rho.
double optimality_certificate(const AnalysisProblem& problem, const Vector& x_hat,
                              double rho);

// Cone-constraint slack RHS - LHS of
//   ||D*_{T^c} h||_1 <= lambda*p/rho + 3*||D*_T h||_1 + 4*||D*_{T^c} x||_1,
// T = indices of the s largest |D* x_true| (stable tie-break by index).
double cone_certificate(const AnalysisProblem& problem, const Vector& x_true,
                        const Vector& x_hat, double rho, int s);

// Iteration-count calculators for the smoothing and decomposition routes;
// exposes the O(1/eps) vs O(1/eps^1.5) comparison. Lambda is the caller's
// distance-to-optimum estimate (squared, from a reference run), H_x0 the
// initial objective value, d_norm2 = ||D||_2.
IterationEstimate iteration_estimates(double L_g, double L_grad_f, double Lambda,
                                      double eps, double H_x0, double d_norm2);

// Worst slack of Re<Au, Av> >= -sigma_2s*||u||*||v|| + <u, v> over sampled
// pairs u, v from the s-sparse synthesis set. Nonnegative (to rounding) when
// sigma_2s is the exhaustive constant at level 2s.
double drip_inner_product_check(const LinearOperator& A, const TightFrame& frame,
                                int s, int trials, std::uint64_t seed);
double drip_pair_slack(const LinearOperator& A, double sigma_2s, const Vector& u,
                       const Vector& v);

// Slack of the lower bound
//   Re<Ah, A D D*_{T01} h> >= (1-sigma_2s)*||D*_{T01} h||^2
//                              - sqrt(2/s)*sigma_2s*||D*_{T01} h||*||D*_{T^c} h||_1
// with T from the s largest |D* x_true| and T1 the next s largest |D* h|
// off T. Used as a numeric spot check at converged solutions.
double drip_property_slack(const AnalysisProblem& problem, const Vector& x_true,
                           const Vector& x_hat, int s, double sigma_2s);

// Indices of the s largest |v| (stable: descending magnitude, ascending index).
std::vector<Index> top_s_indices(const Vector& v, int s);

// l1 norm of v off the s largest magnitudes: ||v - (v)_s||_1.
double tail_l1(const Vector& v, int s);

std::int64_t binomial_or_limit(Index n, Index k, std::int64_t limit);

}  // namespace asr
