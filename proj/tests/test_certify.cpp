#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>

#include "asr/certify.hpp"
#include "asr/harness.hpp"
#include "helpers.hpp"

using namespace asr;
using asr::testing::identity_frame;

namespace {

Matrix haar_orthogonal(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix g = rng.gaussian_matrix(n, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

// Independent classical-RIP oracle: enumerate column subsets of A directly.
double classical_rip(const Matrix& a, int s) {
  const Index n = a.cols();
  std::vector<Index> support(static_cast<std::size_t>(s));
  std::iota(support.begin(), support.end(), Index{0});
  double worst = 0.0;
  while (true) {
    Matrix cols(a.rows(), s);
    for (int k = 0; k < s; ++k) cols.col(k) = a.col(support[static_cast<std::size_t>(k)]);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cols.transpose() * cols);
    worst = std::max(worst, std::max(eig.eigenvalues().maxCoeff() - 1.0,
                                     1.0 - eig.eigenvalues().minCoeff()));
    int i = s - 1;
    while (i >= 0 && support[static_cast<std::size_t>(i)] == n - s + i) --i;
    if (i < 0) break;
    ++support[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < s; ++j)
      support[static_cast<std::size_t>(j)] = support[static_cast<std::size_t>(j - 1)] + 1;
  }
  return worst;
}

}  // namespace

TEST_CASE("drip_exhaustive: orthogonal A is a perfect isometry") {
  TightFrame frame = random_tight_frame(6, 9, 1);
  LinearOperator a = LinearOperator::from_matrix(haar_orthogonal(6, 2));
  DripEstimate est = drip_exhaustive(a, frame, 2);
  CHECK(est.sigma_s < 1e-12);
  CHECK(est.supports_checked == 36);  // C(9,2)
}

TEST_CASE("drip_exhaustive: diagonal hand case") {
  Matrix a(2, 2);
  a << 1.0, 0.0, 0.0, 0.5;
  DripEstimate est =
      drip_exhaustive(LinearOperator::from_matrix(a), identity_frame(2), 1);
  CHECK(est.sigma_s == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("drip_exhaustive: equals classical RIP enumeration when D = I") {
  Rng rng(3);
  for (int trial = 0; trial < 3; ++trial) {
    Matrix a = rng.gaussian_matrix(8, 12) / std::sqrt(8.0);
    double oracle = classical_rip(a, 2);
    DripEstimate est =
        drip_exhaustive(LinearOperator::from_matrix(a), identity_frame(12), 2);
    CHECK(std::abs(est.sigma_s - oracle) < 1e-12);
  }
}

TEST_CASE("drip_exhaustive: refuses budgets past 1e6 supports") {
  TightFrame frame = random_tight_frame(30, 60, 4);
  LinearOperator a = LinearOperator::from_matrix(Matrix::Identity(30, 30));
  CHECK_THROWS_WITH_AS(drip_exhaustive(a, frame, 8),
                       doctest::Contains("drip_randomized_lb"), std::runtime_error);
}

TEST_CASE("drip_randomized_lb: never exceeds exhaustive, equals it when saturated") {
  TightFrame frame = random_tight_frame(5, 5, 5);
  Rng rng(6);
  Matrix a = rng.gaussian_matrix(4, 5) / 2.0;
  LinearOperator a_op = LinearOperator::from_matrix(a);
  DripEstimate exhaustive = drip_exhaustive(a_op, frame, 1);
  DripEstimate sampled = drip_randomized_lb(a_op, frame, 1, 10, 7);
  CHECK(sampled.sigma_s <= exhaustive.sigma_s + 1e-15);
  // 300 draws over 5 supports: every support visited on this pinned seed.
  DripEstimate saturated = drip_randomized_lb(a_op, frame, 1, 300, 8);
  CHECK(saturated.sigma_s == exhaustive.sigma_s);
}

TEST_CASE("drip_randomized_lb: within 10% of exhaustive at 500 trials") {
  TightFrame frame = random_tight_frame(20, 24, 9);
  Rng rng(10);
  Matrix a = rng.gaussian_matrix(16, 20) / 4.0;
  LinearOperator a_op = LinearOperator::from_matrix(a);
  DripEstimate exhaustive = drip_exhaustive(a_op, frame, 2);
  DripEstimate sampled = drip_randomized_lb(a_op, frame, 2, 500, 11);
  CHECK(sampled.sigma_s <= exhaustive.sigma_s + 1e-15);
  CHECK(exhaustive.sigma_s - sampled.sigma_s <= 0.1 * exhaustive.sigma_s);
}

TEST_CASE("bound_constants: sigma = 0 closed forms") {
  BoundConstants c = bound_constants(0.0, 1.0);
  CHECK(c.feasible);
  CHECK(c.c0 == 1.5);
  CHECK(c.C0 == doctest::Approx(6.0 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(c.C1 == 4.0);
  CHECK(c.C2 == 1.0);
}

TEST_CASE("bound_constants: sigma = 0.1 frozen evaluation") {
  BoundConstants c = bound_constants(0.1, 1.0);
  CHECK(c.C0 == doctest::Approx(17.836116248912243).epsilon(1e-12));
  CHECK(c.C1 == doctest::Approx(8.7562976663765982).epsilon(1e-12));
  CHECK(c.C2 == doctest::Approx(2.1890744165941496).epsilon(1e-12));
}

TEST_CASE("bound_constants: infeasible at the rounded paper threshold") {
  BoundConstants c = bound_constants(0.1907, 1.0);
  // 0.1907 < 1/(1+3*sqrt(2)) = 0.190743...: still feasible, huge constants.
  CHECK(c.feasible);
  BoundConstants d = bound_constants(0.190744, 1.0);
  CHECK_FALSE(d.feasible);
  CHECK(std::isinf(d.C0));
  CHECK_FALSE(std::isnan(d.C0));
  CHECK(kSigmaFeasibleLimit == doctest::Approx(1.0 / (1.0 + 3.0 * std::sqrt(2.0)))
                                   .epsilon(1e-16));
}

TEST_CASE("bound_constants: increasing in sigma over the feasible range") {
  double prev0 = 0.0, prev1 = 0.0, prev2 = 0.0;
  for (double sigma = 0.0; sigma < 0.19; sigma += 0.01) {
    BoundConstants c = bound_constants(sigma, 1.0);
    REQUIRE(c.feasible);
    CHECK(c.C0 > prev0);
    CHECK(c.C1 > prev1);
    CHECK(c.C2 > prev2);
    prev0 = c.C0;
    prev1 = c.C1;
    prev2 = c.C2;
  }
}

TEST_CASE("error_bound: noiseless sparse truth with vanishing lambda") {
  // Orthogonal A (sigma = 0), D = I, 1-sparse truth: all bound terms vanish.
  const Index n = 8;
  Matrix a = haar_orthogonal(n, 12);
  Vector x_true = Vector::Zero(n);
  x_true[2] = 1.0;
  AnalysisProblem problem;
  problem.b = a * x_true;
  problem.A = LinearOperator::from_matrix(std::move(a));
  problem.frame = identity_frame(n);
  problem.lambda = 1e-10;

  SolverConfig config;
  config.mu = 1.0;
  config.max_iters = 2000;
  IterateTrace trace = sfista(problem, config, &x_true);

  DripEstimate drip = drip_exhaustive(problem.A, problem.frame, 2);
  CertificateReport report =
      error_bound(problem, x_true, trace.final_x, 1e10, 1, drip);
  CHECK(report.measured_error < 1e-4);
  CHECK(report.predicted_bound < 1e-8);
  CHECK(report.noise_condition_ok);  // zero noise
  CHECK(report.feasible);

  // rho = inf drops the third term (exact-l1 limit)
  CertificateReport limit = error_bound(
      problem, x_true, trace.final_x, std::numeric_limits<double>::infinity(), 1, drip);
  double sqrt_s = 1.0;
  double two_term = limit.C0 * sqrt_s * problem.lambda;  // tail is exactly zero
  CHECK(limit.predicted_bound == doctest::Approx(two_term).epsilon(1e-12));
  CHECK(limit.predicted_bound < report.predicted_bound);
}

TEST_CASE("error_bound: refuses non-tight frames") {
  AnalysisProblem problem;
  problem.frame = difference_frame_2d(4, 4);
  problem.A = LinearOperator::from_matrix(Matrix::Identity(16, 16));
  problem.b = Vector::Zero(16);
  problem.lambda = 0.1;
  DripEstimate drip;
  drip.s = 2;
  CHECK_THROWS_AS(error_bound(problem, Vector::Zero(16), Vector::Zero(16), 1.0, 1, drip),
                  std::invalid_argument);
}

TEST_CASE("certified tiny instance: bound, cone, optimality and Lemma 3 checks") {
  CertifiedInstance instance = make_certified_instance(12, 16, 10, 1, 0.02, 0.5, 13);
  REQUIRE(instance.problem.frame.is_tight);

  SolverConfig config;
  config.rho = 1e3;
  config.max_iters = 20000;
  IterateTrace trace = dfista(instance.problem, config, &instance.x_true);

  DripEstimate drip = drip_exhaustive(instance.problem.A, instance.problem.frame, 2);
  CertificateReport report = error_bound(instance.problem, instance.x_true,
                                         trace.final_x, *config.rho, 1, drip);
  CHECK(report.feasible);
  CHECK(report.noise_condition_ok);
  CHECK(report.measured_error <= report.predicted_bound);
  CHECK(report.optimality_residual <= 1.05);
  CHECK(report.cone_slack >= -1e-6 * std::max(1.0, std::abs(report.cone_slack)));

  double lemma3 = drip_property_slack(instance.problem, instance.x_true, trace.final_x,
                                      1, drip.sigma_s);
  CHECK(lemma3 >= -1e-8 * std::max(1.0, instance.x_true.squaredNorm()));
}

TEST_CASE("optimality_certificate: scalar closed form and a non-optimal point") {
  Matrix a(1, 1);
  a << 1.0;
  Vector b(1);
  b << 3.0;
  AnalysisProblem problem;
  problem.A = LinearOperator::from_matrix(a);
  problem.b = b;
  problem.frame = identity_frame(1);
  problem.lambda = 1.0;

  Vector x_hat(1);
  x_hat << 2.0;  // soft-threshold solution of 0.5*(x-3)^2 + |x|
  CHECK(optimality_certificate(problem, x_hat, 1.0) <= 1.0 + 1e-14);

  Vector zero = Vector::Zero(1);
  CHECK(optimality_certificate(problem, zero, 1.0) > 2.0);
}

TEST_CASE("cone_certificate: h = 0 reduces to the affine slack") {
  Vector x_true;
  TightFrame frame = random_tight_frame(8, 10, 14);
  Rng rng(15);
  Matrix a = rng.gaussian_matrix(6, 8);
  AnalysisProblem problem;
  problem.b = Vector::Zero(6);
  problem.A = LinearOperator::from_matrix(std::move(a));
  problem.frame = frame;
  problem.lambda = 0.3;
  Vector x = rng.gaussian_vector(8);

  const int s = 2;
  const double rho = 4.0;
  double slack = cone_certificate(problem, x, x, rho, s);
  Vector dx = frame.analyze(x);
  double tail = tail_l1(dx, s);
  CHECK(slack ==
        doctest::Approx(problem.lambda * frame.p / rho + 4.0 * tail).epsilon(1e-12));
  CHECK(slack >= 0.0);
}

TEST_CASE("iteration_estimates: symmetric inputs and eps scaling") {
  IterationEstimate unit = iteration_estimates(1.0, 1.0, 1.0, 0.01, 1.0, 1.0);
  CHECK(unit.K_smoothing == doctest::Approx(2.0 / 0.01 + 1.0 / std::sqrt(0.01))
                                .epsilon(1e-14));

  const double eps = 1e-4;
  IterationEstimate base = iteration_estimates(2.0, 3.0, 4.0, eps, 5.0, 1.5);
  IterationEstimate half = iteration_estimates(2.0, 3.0, 4.0, eps / 2.0, 5.0, 1.5);
  CHECK(half.K_smoothing / base.K_smoothing == doctest::Approx(2.0).epsilon(0.02));
  CHECK(half.K_decomposition / base.K_decomposition ==
        doctest::Approx(std::pow(2.0, 1.5)).epsilon(0.02));
  CHECK(base.mu_star > 0.0);
  CHECK(base.rho_star > 0.0);
  CHECK_THROWS_AS(iteration_estimates(0.0, 1.0, 1.0, 1.0, 1.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("drip_inner_product_check: u = v and orthogonal A cases") {
  TightFrame frame = random_tight_frame(6, 8, 16);
  Matrix q = haar_orthogonal(6, 17);
  LinearOperator a = LinearOperator::from_matrix(q);

  // u = v: slack is ||Au||^2 + sigma||u||^2 - ||u||^2 >= 0 under the D-RIP.
  DripEstimate drip = drip_exhaustive(a, frame, 2);
  Rng rng(18);
  Vector z = Vector::Zero(8);
  z[1] = rng.normal();
  Vector u = frame.synthesize(z);
  CHECK(drip_pair_slack(a, drip.sigma_s, u, u) >= -1e-12);

  // orthogonal A: sigma = 0 and the polarization identity holds with equality
  double worst = drip_inner_product_check(a, frame, 1, 2000, 19);
  CHECK(std::abs(worst) < 1e-12);
}

TEST_CASE("drip_inner_product_check: random tiny instance, 1e4 pairs") {
  TightFrame frame = random_tight_frame(10, 12, 20);
  Rng rng(21);
  Matrix a = rng.gaussian_matrix(8, 10) / std::sqrt(8.0);
  double worst =
      drip_inner_product_check(LinearOperator::from_matrix(a), frame, 2, 10000, 22);
  CHECK(worst >= -1e-12);
}

TEST_CASE("top_s_indices: stable tie-break by ascending index") {
  Vector v(5);
  v << 1.0, -2.0, 2.0, 0.5, -1.0;
  std::vector<Index> top = top_s_indices(v, 2);
  REQUIRE(top.size() == 2);
  // |v| = [1, 2, 2, 0.5, 1]: tie between indices 1 and 2 resolved to 1 first.
  CHECK(top[0] == 1);
  CHECK(top[1] == 2);
  CHECK(tail_l1(v, 2) == doctest::Approx(2.5).epsilon(1e-15));
}
