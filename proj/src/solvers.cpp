#include "asr/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "asr/io.hpp"
#include "asr/prox.hpp"

namespace asr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double momentum_next(double t) { return (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0; }

double rel_error_to(const Vector* x_true, const Vector& x) {
  if (!x_true) return std::numeric_limits<double>::quiet_NaN();
  double denom = x_true->norm();
  if (denom == 0.0) return x.norm();
  return (x - *x_true).norm() / denom;
}

// Tracks the "relative change small for 10 consecutive iterations" rule.
class EarlyStop {
 public:
  explicit EarlyStop(double tol) : tol_(tol) {}
  bool update(double value) {
    if (tol_ <= 0.0) return false;
    if (has_prev_) {
      double denom = std::max(1.0, std::abs(value));
      streak_ = std::abs(prev_ - value) < tol_ * denom ? streak_ + 1 : 0;
    }
    prev_ = value;
    has_prev_ = true;
    return streak_ >= 10;
  }

 private:
  double tol_;
  double prev_ = 0.0;
  bool has_prev_ = false;
  int streak_ = 0;
};

void check_finite(double value, int iteration, const char* where) {
  if (!std::isfinite(value))
    throw SolverError(std::string(where) + ": non-finite objective at iteration " +
                          std::to_string(iteration),
                      iteration);
}

constexpr int kNormPowerIters = 200;
constexpr std::uint64_t kNormSeed = 0x5eedULL;

}  // namespace

void validate_problem(const AnalysisProblem& problem) {
  if (problem.A.in_dim() != problem.frame.n)
    throw std::invalid_argument("AnalysisProblem: A columns != frame signal dim");
  if (problem.b.size() != problem.A.out_dim())
    throw std::invalid_argument("AnalysisProblem: b size != A rows");
  if (problem.frame.d_star.in_dim() != problem.frame.n ||
      problem.frame.d_star.out_dim() != problem.frame.p)
    throw std::invalid_argument("AnalysisProblem: frame operator dims inconsistent");
  if (!(problem.lambda > 0.0))
    throw std::invalid_argument("AnalysisProblem: lambda must be > 0");
}

void IterateTrace::to_csv(const std::string& path, bool with_stage) const {
  CsvTable table;
  table.columns = {"iter", "objective", "true_objective", "rel_error", "t_k", "seconds"};
  if (with_stage) table.columns.push_back("stage");
  table.rows.reserve(objective.size());
  for (std::size_t k = 0; k < objective.size(); ++k) {
    std::vector<double> row = {static_cast<double>(k + 1), objective[k],
                               true_objective[k], rel_error[k], momentum[k], seconds[k]};
    if (with_stage) row.push_back(stage.empty() ? 0.0 : static_cast<double>(stage[k]));
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

IterateTrace proximal_gradient(const CompositeProblem& problem, const Vector& x0,
                               int iters, double objective_tol) {
  if (!(problem.lipschitz_bound > 0.0))
    throw std::invalid_argument("proximal_gradient: Lipschitz bound must be > 0");
  const double step = 1.0 / problem.lipschitz_bound;
  auto start = Clock::now();
  EarlyStop stopper(objective_tol);
  IterateTrace trace;
  Vector x = x0;
  for (int k = 1; k <= iters; ++k) {
    x = problem.prox_nonsmooth(x - step * problem.smooth_grad(x), step);
    double obj = problem.smooth_value(x) + problem.nonsmooth_value(x);
    check_finite(obj, k, "proximal_gradient");
    trace.objective.push_back(obj);
    trace.true_objective.push_back(obj);
    trace.rel_error.push_back(std::numeric_limits<double>::quiet_NaN());
    trace.momentum.push_back(1.0);
    trace.seconds.push_back(seconds_since(start));
    if (stopper.update(obj)) break;
  }
  trace.final_x = x;
  return trace;
}

IterateTrace mfista(const CompositeProblem& problem, const Vector& x0, int iters,
                    double objective_tol) {
  if (!(problem.lipschitz_bound > 0.0))
    throw std::invalid_argument("mfista: Lipschitz bound must be > 0");
  const double step = 1.0 / problem.lipschitz_bound;
  auto start = Clock::now();
  EarlyStop stopper(objective_tol);
  IterateTrace trace;

  Vector x_prev = x0;
  Vector y = x0;
  double t = 1.0;
  double obj_prev = problem.smooth_value(x_prev) + problem.nonsmooth_value(x_prev);

  for (int k = 1; k <= iters; ++k) {
    Vector z = problem.prox_nonsmooth(y - step * problem.smooth_grad(y), step);
    double obj_z = problem.smooth_value(z) + problem.nonsmooth_value(z);
    check_finite(obj_z, k, "mfista");

    const bool accept = obj_z <= obj_prev;
    const Vector& x = accept ? z : x_prev;
    double obj_x = accept ? obj_z : obj_prev;

    double t_next = momentum_next(t);
    y = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev);

    x_prev = x;
    obj_prev = obj_x;
    t = t_next;

    trace.objective.push_back(obj_x);
    trace.true_objective.push_back(obj_x);
    trace.rel_error.push_back(std::numeric_limits<double>::quiet_NaN());
    trace.momentum.push_back(t_next);
    trace.seconds.push_back(seconds_since(start));
    if (stopper.update(obj_x)) break;
  }
  trace.final_x = x_prev;
  return trace;
}

double alasso_objective(const AnalysisProblem& problem, const Vector& x) {
  Vector resid = problem.A.apply(x) - problem.b;
  return 0.5 * resid.squaredNorm() +
         problem.lambda * problem.frame.analyze(x).lpNorm<1>();
}

double ralasso_objective(const AnalysisProblem& problem, const Vector& x,
                         const Vector& z, double rho) {
  Vector resid = problem.A.apply(x) - problem.b;
  Vector gap = z - problem.frame.analyze(x);
  return 0.5 * resid.squaredNorm() + problem.lambda * z.lpNorm<1>() +
         0.5 * rho * gap.squaredNorm();
}

double smoothed_objective(const AnalysisProblem& problem, double mu, const Vector& x) {
  Vector resid = problem.A.apply(x) - problem.b;
  EnvelopeParams env(problem.lambda, mu);
  return 0.5 * resid.squaredNorm() + envelope_value(problem.frame.analyze(x), env);
}

Vector smoothed_gradient(const AnalysisProblem& problem, double mu, const Vector& x) {
  EnvelopeParams env(problem.lambda, mu);
  Vector grad_f = problem.A.apply_adjoint(problem.A.apply(x) - problem.b);
  Vector grad_g = problem.frame.synthesize(envelope_gradient(problem.frame.analyze(x), env));
  return grad_f + grad_g;
}

double certified_norm(const LinearOperator& op) {
  return kLipschitzSafety * spectral_norm(op, kNormPowerIters, kNormSeed);
}

double lipschitz_smoothing(const AnalysisProblem& problem, double mu) {
  double norm_a = certified_norm(problem.A);
  double norm_d = problem.frame.is_tight ? 1.0 : certified_norm(problem.frame.d_star);
  return norm_a * norm_a + norm_d * norm_d / mu;
}

double lipschitz_decomposition(const AnalysisProblem& problem, double rho) {
  double norm_a = certified_norm(problem.A);
  double norm_d = problem.frame.is_tight ? 1.0 : certified_norm(problem.frame.d_star);
  return norm_a * norm_a + rho * (1.0 + norm_d * norm_d);
}

IterateTrace sfista(const AnalysisProblem& problem, const SolverConfig& config,
                    const Vector* x_true) {
  validate_problem(problem);
  if (!config.mu || config.rho)
    throw std::invalid_argument("sfista: config must set mu (and not rho)");
  if (config.max_iters < 1) throw std::invalid_argument("sfista: max_iters must be >= 1");
  const double mu = *config.mu;
  const double lambda = problem.lambda;
  const EnvelopeParams env(lambda, mu);
  const double L = lipschitz_smoothing(problem, mu);
  const double step = 1.0 / L;

  Vector x_prev = config.x0 ? *config.x0 : Vector::Zero(problem.frame.n);
  Vector y = x_prev;
  double t = 1.0;

  // Cached analysis/measurement products of the incumbent x_{k-1}; one A
  // apply and one D* apply per objective evaluation.
  Vector dx_prev = problem.frame.analyze(x_prev);
  Vector resid_prev = problem.A.apply(x_prev) - problem.b;
  double data_prev = 0.5 * resid_prev.squaredNorm();
  double obj_prev = data_prev + envelope_value(dx_prev, env);
  double true_prev = data_prev + lambda * dx_prev.lpNorm<1>();

  auto start = Clock::now();
  EarlyStop stopper(config.objective_tol);
  IterateTrace trace;

  for (int k = 1; k <= config.max_iters; ++k) {
    Vector dy = problem.frame.analyze(y);
    Vector grad = problem.A.apply_adjoint(problem.A.apply(y) - problem.b);
    if (config.printed_gradient_variant)
      grad += problem.frame.synthesize(envelope_gradient(dx_prev, env));
    else
      grad += problem.frame.synthesize(envelope_gradient(dy, env));

    Vector z = y - step * grad;
    Vector dz = problem.frame.analyze(z);
    Vector resid_z = problem.A.apply(z) - problem.b;
    double data_z = 0.5 * resid_z.squaredNorm();
    double obj_z = data_z + envelope_value(dz, env);
    double true_z = data_z + lambda * dz.lpNorm<1>();
    check_finite(obj_z, k, "sfista");

    const bool accept = obj_z <= obj_prev;
    Vector x = accept ? z : x_prev;
    double obj_x = accept ? obj_z : obj_prev;
    double true_x = accept ? true_z : true_prev;

    double t_next = momentum_next(t);
    y = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev);

    x_prev = std::move(x);
    if (accept) dx_prev = std::move(dz);
    obj_prev = obj_x;
    true_prev = true_x;
    t = t_next;

    trace.objective.push_back(obj_x);
    trace.true_objective.push_back(true_x);
    trace.rel_error.push_back(rel_error_to(x_true, x_prev));
    trace.momentum.push_back(t_next);
    trace.seconds.push_back(seconds_since(start));
    if (stopper.update(obj_x)) break;
  }
  trace.final_x = x_prev;
  return trace;
}

IterateTrace dfista(const AnalysisProblem& problem, const SolverConfig& config,
                    const Vector* x_true) {
  validate_problem(problem);
  if (!config.rho || config.mu)
    throw std::invalid_argument("dfista: config must set rho (and not mu)");
  if (config.max_iters < 1) throw std::invalid_argument("dfista: max_iters must be >= 1");
  const double rho = *config.rho;
  const double lambda = problem.lambda;
  const double L = lipschitz_decomposition(problem, rho);
  const double step = 1.0 / L;

  Vector x_prev = config.x0 ? *config.x0 : Vector::Zero(problem.frame.n);
  Vector z_prev = config.z0 ? *config.z0 : problem.frame.analyze(x_prev);
  Vector u = x_prev;  // momentum point for x
  Vector v = z_prev;  // momentum point for z
  double t = 1.0;

  Vector dx_prev = problem.frame.analyze(x_prev);
  Vector resid_prev = problem.A.apply(x_prev) - problem.b;
  double data_prev = 0.5 * resid_prev.squaredNorm();
  double feas_prev = (z_prev - dx_prev).norm();
  double obj_prev =
      data_prev + lambda * z_prev.lpNorm<1>() + 0.5 * rho * feas_prev * feas_prev;
  double true_prev = data_prev + lambda * dx_prev.lpNorm<1>();

  auto start = Clock::now();
  EarlyStop stopper(config.objective_tol);
  IterateTrace trace;

  for (int k = 1; k <= config.max_iters; ++k) {
    Vector du = problem.frame.analyze(u);
    Vector coupling = du - v;
    Vector grad_x =
        problem.A.apply_adjoint(problem.A.apply(u) - problem.b) +
        rho * problem.frame.synthesize(coupling);
    // grad_z = rho*(v - D*u) = -rho*coupling
    Vector p = u - step * grad_x;
    Vector q = soft_threshold(v + (step * rho) * coupling, lambda * step);

    Vector dp = problem.frame.analyze(p);
    Vector resid_p = problem.A.apply(p) - problem.b;
    double data_p = 0.5 * resid_p.squaredNorm();
    Vector gap = q - dp;
    double feas_pq = gap.norm();
    double obj_pq = data_p + lambda * q.lpNorm<1>() + 0.5 * rho * feas_pq * feas_pq;
    double true_p = data_p + lambda * dp.lpNorm<1>();
    check_finite(obj_pq, k, "dfista");

    const bool accept = obj_pq <= obj_prev;
    Vector xk = accept ? p : x_prev;
    Vector zk = accept ? q : z_prev;
    double obj_k = accept ? obj_pq : obj_prev;
    double true_k = accept ? true_p : true_prev;
    double feas_k = accept ? feas_pq : feas_prev;

    double t_next = momentum_next(t);
    u = xk + (t / t_next) * (p - xk) + ((t - 1.0) / t_next) * (xk - x_prev);
    v = zk + (t / t_next) * (q - zk) + ((t - 1.0) / t_next) * (zk - z_prev);

    x_prev = std::move(xk);
    z_prev = std::move(zk);
    if (accept) dx_prev = std::move(dp);
    obj_prev = obj_k;
    true_prev = true_k;
    feas_prev = feas_k;
    t = t_next;

    trace.objective.push_back(obj_k);
    trace.true_objective.push_back(true_k);
    trace.rel_error.push_back(rel_error_to(x_true, x_prev));
    trace.momentum.push_back(t_next);
    trace.seconds.push_back(seconds_since(start));
    trace.feasibility.push_back(feas_k);
    if (stopper.update(obj_k)) break;
  }
  trace.final_x = x_prev;
  trace.final_z = z_prev;
  return trace;
}

IterateTrace continuation(const AnalysisProblem& problem, double mu0, double muf,
                          double gamma, int inner_iters,
                          const SolverConfig& base_config, const Vector* x_true) {
  if (!(mu0 >= muf) || !(muf > 0.0))
    throw std::invalid_argument("continuation: need mu0 >= muf > 0");
  if (!(gamma > 1.0)) throw std::invalid_argument("continuation: need gamma > 1");
  if (inner_iters < 1) throw std::invalid_argument("continuation: inner_iters >= 1");

  IterateTrace trace;
  Vector x = base_config.x0 ? *base_config.x0 : Vector::Zero(problem.frame.n);
  double mu = mu0;
  int stage_id = 0;
  auto start = Clock::now();
  while (true) {
    SolverConfig stage_config = base_config;
    stage_config.mu = mu;
    stage_config.rho.reset();
    stage_config.max_iters = inner_iters;
    stage_config.x0 = x;
    IterateTrace stage_trace = sfista(problem, stage_config, x_true);

    for (std::size_t i = 0; i < stage_trace.iterations(); ++i) {
      trace.objective.push_back(stage_trace.objective[i]);
      trace.true_objective.push_back(stage_trace.true_objective[i]);
      trace.rel_error.push_back(stage_trace.rel_error[i]);
      trace.momentum.push_back(stage_trace.momentum[i]);
      trace.seconds.push_back(seconds_since(start));
      trace.stage.push_back(stage_id);
    }
    x = stage_trace.final_x;

    // Stop after the first stage at (or numerically at) the target mu.
    if (mu <= muf * (1.0 + 1e-9)) break;
    mu /= gamma;
    ++stage_id;
  }
  trace.final_x = x;
  return trace;
}

}  // namespace asr
