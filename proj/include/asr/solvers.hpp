#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "asr/frames.hpp"
#include "asr/linops.hpp"
#include "asr/types.hpp"

namespace asr {

// min F(x) + G(x) with smooth F (L-Lipschitz gradient) and proxable G.
struct CompositeProblem {
  std::function<double(const Vector&)> smooth_value;
  std::function<Vector(const Vector&)> smooth_grad;
  // prox_nonsmooth(v, step) = argmin_u { step*G(u) + 0.5*||u - v||^2 }
  std::function<Vector(const Vector&, double)> prox_nonsmooth;
  std::function<double(const Vector&)> nonsmooth_value;
  double lipschitz_bound = 0.0;
};

// The analysis-LASSO instance: 0.5*||Ax - b||^2 + lambda*||D* x||_1.
struct AnalysisProblem {
  LinearOperator A;
  Vector b;
  TightFrame frame;
  double lambda = 0.0;
};

void validate_problem(const AnalysisProblem& problem);

// Per-run knobs. Exactly one of mu (smoothed run) / rho (decomposed run)
// must be set when calling sfista/dfista.
struct SolverConfig {
  std::optional<double> mu;
  std::optional<double> rho;
  int max_iters = 1000;
  std::optional<Vector> x0;        // default: zeros
  std::optional<Vector> z0;        // default: D* x0
  double objective_tol = 0.0;      // 0 disables early stopping
  std::uint64_t seed = 0;
  // Reproduces Algorithm 1 exactly as printed (envelope gradient taken at
  // D* x_{k-1} instead of D* y_k). Off by default; the default variant is
  // the one covered by the O(1/k^2) guarantee.
  bool printed_gradient_variant = false;
};

// Per-iteration history. Row k (1-based iteration) stores:
//   objective      - the objective the solver actually descends
//                    (F+G, H_mu for smoothed runs, G_rho for decomposed runs)
//   true_objective - exact analysis-LASSO objective H(x_k) where meaningful
//   rel_error      - ||x_k - x_true|| / ||x_true|| when the truth is known, else NaN
//   momentum       - t_{k+1} from the momentum recurrence
//   seconds        - cumulative wall time
//   feasibility    - ||z_k - D* x_k|| (decomposed runs only)
//   stage          - continuation stage id (0 for single-stage runs)
struct IterateTrace {
  std::vector<double> objective;
  std::vector<double> true_objective;
  std::vector<double> rel_error;
  std::vector<double> momentum;
  std::vector<double> seconds;
  std::vector<double> feasibility;
  std::vector<int> stage;
  Vector final_x;
  Vector final_z;

  std::size_t iterations() const { return objective.size(); }
  // Header: iter,objective,true_objective,rel_error,t_k,seconds[,stage]
  void to_csv(const std::string& path, bool with_stage = false) const;
};

// Raised when a solver meets a non-finite objective or iterate.
struct SolverError : std::runtime_error {
  SolverError(const std::string& what, int iteration_in)
      : std::runtime_error(what), iteration(iteration_in) {}
  int iteration;
};

// x_k = prox_{G/L}(x_{k-1} - grad F(x_{k-1})/L).
IterateTrace proximal_gradient(const CompositeProblem& problem, const Vector& x0,
                               int iters, double objective_tol = 0.0);

// Monotone fast proximal gradient on a composite problem.
IterateTrace mfista(const CompositeProblem& problem, const Vector& x0, int iters,
                    double objective_tol = 0.0);

// Smoothing-based run: monotone fast gradient on
//   H_mu(x) = 0.5*||Ax-b||^2 + lambda * sum_i Huber_{lambda*mu}((D*x)[i]).
IterateTrace sfista(const AnalysisProblem& problem, const SolverConfig& config,
                    const Vector* x_true = nullptr);

// Decomposition-based run on the joint objective
//   G_rho(x, z) = 0.5*||Ax-b||^2 + lambda*||z||_1 + (rho/2)*||z - D*x||^2.
IterateTrace dfista(const AnalysisProblem& problem, const SolverConfig& config,
                    const Vector* x_true = nullptr);

// Warm-started sequence of smoothed runs: mu = mu0, mu0/gamma, ... runs an
// inner smoothed solve at each mu and stops after the first stage with
// mu <= muf. Stage ids are recorded in the trace.
IterateTrace continuation(const AnalysisProblem& problem, double mu0, double muf,
                          double gamma, int inner_iters,
                          const SolverConfig& base_config,
                          const Vector* x_true = nullptr);

// Exact objectives used for monotone comparisons and traces.
double alasso_objective(const AnalysisProblem& problem, const Vector& x);
double ralasso_objective(const AnalysisProblem& problem, const Vector& x,
                         const Vector& z, double rho);

// Smoothed objective/gradient, shared by the solver and the test suite.
double smoothed_objective(const AnalysisProblem& problem, double mu, const Vector& x);
Vector smoothed_gradient(const AnalysisProblem& problem, double mu, const Vector& x);

// Certified Lipschitz upper bounds built from safety-factored power-iteration
// norm estimates (||D||_2 = 1 is used exactly for tight frames).
double lipschitz_smoothing(const AnalysisProblem& problem, double mu);
double lipschitz_decomposition(const AnalysisProblem& problem, double rho);
double certified_norm(const LinearOperator& op);

inline constexpr double kLipschitzSafety = 1.01;

}  // namespace asr
