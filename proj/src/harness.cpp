#include "asr/harness.hpp"

#include <fftw3.h>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>

#include "asr/io.hpp"
#include "asr/parallel.hpp"
#include "asr/rng.hpp"

namespace asr {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ConfigMap ConfigMap::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ConfigMap map;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string text = trim(line);
    if (text.empty()) continue;
    std::size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config " + path + ":" + std::to_string(lineno) +
                        ": expected `key = value`");
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config " + path + ":" + std::to_string(lineno) + ": empty key");
    map.set(key, value);
  }
  return map;
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  for (auto& entry : entries_)
    if (entry.first == key) {
      entry.second = value;
      return;
    }
  entries_.emplace_back(key, value);
}

const std::string* ConfigMap::find(const std::string& key) const {
  for (const auto& entry : entries_)
    if (entry.first == key) return &entry.second;
  return nullptr;
}

bool ConfigMap::has(const std::string& key) const { return find(key) != nullptr; }

std::string ConfigMap::require_string(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw ConfigError("missing required key: " + key);
  return *v;
}

std::string ConfigMap::get_string_or(const std::string& key,
                                     const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

double ConfigMap::require_double(const std::string& key) const {
  const std::string text = require_string(key);
  try {
    std::size_t pos = 0;
    double value = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ConfigError("key `" + key + "`: cannot parse real value from '" + text + "'");
  }
}

double ConfigMap::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? require_double(key) : fallback;
}

std::int64_t ConfigMap::require_int(const std::string& key) const {
  const std::string text = require_string(key);
  try {
    std::size_t pos = 0;
    long long value = std::stoll(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw ConfigError("key `" + key + "`: cannot parse integer from '" + text + "'");
  }
}

std::int64_t ConfigMap::get_int_or(const std::string& key, std::int64_t fallback) const {
  return has(key) ? require_int(key) : fallback;
}

std::uint64_t ConfigMap::get_seed_or(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string text = require_string(key);
  try {
    return std::stoull(text);
  } catch (const std::exception&) {
    throw ConfigError("key `" + key + "`: cannot parse seed from '" + text + "'");
  }
}

std::vector<double> ConfigMap::require_list(const std::string& key) const {
  const std::string text = require_string(key);
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::string item = trim(cell);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("key `" + key + "`: cannot parse list entry '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("key `" + key + "`: empty list");
  return out;
}

std::vector<double> ConfigMap::get_list_or(const std::string& key,
                                           std::vector<double> fallback) const {
  return has(key) ? require_list(key) : std::move(fallback);
}

void ConfigMap::write_manifest(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& extra) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "# run manifest\n";
  out << "version = " << kVersion << "\n";
  for (const auto& entry : entries_) out << entry.first << " = " << entry.second << "\n";
  for (const auto& entry : extra) out << entry.first << " = " << entry.second << "\n";
}

double relative_error(const Vector& x_hat, const Vector& x_true) {
  double denom = x_true.norm();
  if (denom == 0.0) return x_hat.norm();
  return (x_hat - x_true).norm() / denom;
}

ProblemInstance make_problem(Index n, Index m, const TightFrame& frame, Index l,
                             double noise_sigma, std::uint64_t seed, double lambda) {
  if (frame.n != n) throw std::invalid_argument("make_problem: frame dimension mismatch");
  if (m < 1) throw std::invalid_argument("make_problem: m must be >= 1");
  Rng a_rng(mix_seed(seed, 1));
  Matrix a = a_rng.gaussian_matrix(m, n);
  CosparseSignal sig = cosparse_signal(frame, l, mix_seed(seed, 2));
  Vector b = a * sig.x;
  if (noise_sigma > 0.0) {
    Rng w_rng(mix_seed(seed, 3));
    b += noise_sigma * w_rng.gaussian_vector(m);
  }
  ProblemInstance instance;
  instance.problem.A = LinearOperator::from_matrix(std::move(a));
  instance.problem.b = std::move(b);
  instance.problem.frame = frame;
  instance.problem.lambda = lambda;
  instance.x_true = sig.x;
  return instance;
}

void GridResult::to_csv(const std::string& path) const {
  CsvTable table;
  table.columns = {"alpha", "beta", "mean_err", "std_err", "trials"};
  for (const auto& cell : cells)
    table.rows.push_back({cell.alpha, cell.beta, cell.mean_err, cell.std_err,
                          static_cast<double>(cell.trials)});
  write_csv(path, table);
}

GridResult phase_diagram(const ExperimentConfig& config) {
  if (config.n < 1 || config.p < config.n)
    throw ConfigError("phase_diagram: need p >= n >= 1");
  if (!(config.lambda > 0.0)) throw ConfigError("phase_diagram: lambda must be > 0");
  if (config.trials < 1) throw ConfigError("phase_diagram: trials must be >= 1");
  const bool use_sfista = config.solver == "sfista";
  if (!use_sfista && config.solver != "dfista")
    throw ConfigError("phase_diagram: solver must be sfista or dfista");
  if (use_sfista && !(config.mu > 0.0))
    throw ConfigError("phase_diagram: mu must be > 0 for sfista");
  if (!use_sfista && !(config.rho > 0.0))
    throw ConfigError("phase_diagram: rho must be > 0 for dfista");
  for (double a : config.alpha_grid)
    if (!(a > 0.0) || a > 1.0) throw ConfigError("phase_diagram: alpha outside (0,1]");
  for (double b : config.beta_grid)
    if (!(b > 0.0) || b > 1.0) throw ConfigError("phase_diagram: beta outside (0,1]");

  const std::size_t n_cells = config.alpha_grid.size() * config.beta_grid.size();
  const std::size_t n_tasks = n_cells * static_cast<std::size_t>(config.trials);
  std::vector<double> errors(n_tasks, std::numeric_limits<double>::quiet_NaN());

  parallel_for(n_tasks, config.threads, [&](std::size_t task) {
    const std::size_t cell = task / static_cast<std::size_t>(config.trials);
    const int trial = static_cast<int>(task % static_cast<std::size_t>(config.trials));
    const std::size_t ai = cell / config.beta_grid.size();
    const std::size_t bi = cell % config.beta_grid.size();
    const double alpha = config.alpha_grid[ai];
    const double beta = config.beta_grid[bi];

    const Index m = std::max<Index>(1, std::llround(alpha * static_cast<double>(config.n)));
    Index l = std::llround(static_cast<double>(config.n) -
                           beta * static_cast<double>(m));
    l = std::clamp<Index>(l, 0, config.p);

    const std::uint64_t seed = mix_seed(config.master_seed, cell, trial);
    try {
      TightFrame frame = random_tight_frame(config.n, config.p, mix_seed(seed, 10));
      ProblemInstance instance =
          make_problem(config.n, m, frame, l, config.noise_sigma, seed, config.lambda);
      SolverConfig run;
      run.max_iters = config.iters;
      run.seed = seed;
      IterateTrace trace;
      if (use_sfista) {
        run.mu = config.mu;
        trace = sfista(instance.problem, run, &instance.x_true);
      } else {
        run.rho = config.rho;
        trace = dfista(instance.problem, run, &instance.x_true);
      }
      errors[task] = relative_error(trace.final_x, instance.x_true);
    } catch (const std::exception&) {
      // leave NaN: recorded as a failed trial, the sweep continues
    }
  });

  GridResult result;
  result.cells.reserve(n_cells);
  for (std::size_t ai = 0; ai < config.alpha_grid.size(); ++ai)
    for (std::size_t bi = 0; bi < config.beta_grid.size(); ++bi) {
      const std::size_t cell = ai * config.beta_grid.size() + bi;
      GridCell out;
      out.alpha = config.alpha_grid[ai];
      out.beta = config.beta_grid[bi];
      double sum = 0.0;
      int good = 0;
      for (int t = 0; t < config.trials; ++t) {
        double e = errors[cell * static_cast<std::size_t>(config.trials) +
                          static_cast<std::size_t>(t)];
        if (std::isnan(e)) continue;
        sum += e;
        ++good;
      }
      out.trials = good;
      out.failures = config.trials - good;
      out.mean_err = good > 0 ? sum / good : std::numeric_limits<double>::quiet_NaN();
      double var = 0.0;
      if (good > 1) {
        for (int t = 0; t < config.trials; ++t) {
          double e = errors[cell * static_cast<std::size_t>(config.trials) +
                            static_cast<std::size_t>(t)];
          if (std::isnan(e)) continue;
          var += (e - out.mean_err) * (e - out.mean_err);
        }
        var /= (good - 1);
      }
      out.std_err = std::sqrt(var);
      result.cells.push_back(out);
    }
  return result;
}

std::vector<LabeledTrace> compare_solvers(const AnalysisProblem& problem,
                                          const std::vector<LabeledRun>& runs,
                                          const Vector* x_true, int threads) {
  std::vector<LabeledTrace> out(runs.size());
  parallel_for(runs.size(), threads, [&](std::size_t i) {
    out[i].label = runs[i].label;
    if (runs[i].config.mu)
      out[i].trace = sfista(problem, runs[i].config, x_true);
    else
      out[i].trace = dfista(problem, runs[i].config, x_true);
  });
  return out;
}

CsvTable compare_summary(const std::vector<LabeledTrace>& traces,
                         const std::vector<int>& checkpoints) {
  CsvTable table;
  table.columns = {"run", "iter", "objective", "true_objective", "rel_error"};
  for (std::size_t r = 0; r < traces.size(); ++r) {
    const IterateTrace& t = traces[r].trace;
    for (int k : checkpoints) {
      if (k < 1 || static_cast<std::size_t>(k) > t.iterations()) continue;
      std::size_t i = static_cast<std::size_t>(k - 1);
      table.rows.push_back({static_cast<double>(r), static_cast<double>(k),
                            t.objective[i], t.true_objective[i], t.rel_error[i]});
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Phantom reconstruction pieces
// ---------------------------------------------------------------------------

Vector make_phantom_image(Index side) {
  if (side < 16) throw std::invalid_argument("make_phantom_image: side must be >= 16");
  struct Ellipse {
    double cx, cy, a, b, theta, value;
  };
  // Additive piecewise-constant regions; every pixel value stays in [0, 1].
  const Ellipse ellipses[] = {
      {0.00, 0.00, 0.69, 0.92, 0.0, 1.00},
      {0.00, -0.02, 0.62, 0.85, 0.0, -0.70},
      {0.22, 0.00, 0.11, 0.31, -0.31, 0.25},
      {-0.22, 0.00, 0.16, 0.41, 0.31, 0.35},
      {0.00, 0.35, 0.21, 0.25, 0.0, 0.30},
      {0.00, -0.45, 0.05, 0.05, 0.0, 0.45},
  };
  Vector image = Vector::Zero(side * side);
  for (Index r = 0; r < side; ++r)
    for (Index c = 0; c < side; ++c) {
      double x = (2.0 * static_cast<double>(c) - side + 1.0) / static_cast<double>(side);
      double y = (2.0 * static_cast<double>(r) - side + 1.0) / static_cast<double>(side);
      double value = 0.0;
      for (const Ellipse& e : ellipses) {
        double dx = x - e.cx, dy = y - e.cy;
        double ct = std::cos(e.theta), st = std::sin(e.theta);
        double ex = dx * ct + dy * st;
        double ey = -dx * st + dy * ct;
        if (ex * ex / (e.a * e.a) + ey * ey / (e.b * e.b) <= 1.0) value += e.value;
      }
      image[r * side + c] = value;
    }
  return image;
}

std::vector<std::pair<Index, Index>> radial_mask(Index side, int num_lines) {
  if (num_lines < 1) throw std::invalid_argument("radial_mask: need at least one line");
  std::set<std::pair<Index, Index>> points;
  if (num_lines >= 2 * side) {
    std::fprintf(stderr,
                 "radial_mask: %d lines meets or exceeds full sampling on a %lld-point "
                 "grid; clamping to the full grid\n",
                 num_lines, static_cast<long long>(side));
    for (Index u = 0; u < side; ++u)
      for (Index v = 0; v < side; ++v) points.insert({u, v});
  } else {
    const double pi = std::acos(-1.0);
    for (int j = 0; j < num_lines; ++j) {
      double theta = pi * static_cast<double>(j) / static_cast<double>(num_lines);
      double ct = std::cos(theta), st = std::sin(theta);
      double half = static_cast<double>(side) / 2.0;
      for (double t = -half; t <= half; t += 0.5) {
        Index du = static_cast<Index>(std::llround(t * ct));
        Index dv = static_cast<Index>(std::llround(t * st));
        Index u = ((du % side) + side) % side;
        Index v = ((dv % side) + side) % side;
        points.insert({u, v});
      }
    }
  }
  return {points.begin(), points.end()};
}

namespace {

// FFTW planning is not thread-safe; executing distinct buffers is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct DftPlans {
  Index side;
  fftw_plan forward;
  fftw_plan backward;

  explicit DftPlans(Index side_in) : side(side_in) {
    std::vector<std::complex<double>> a(static_cast<std::size_t>(side * side));
    std::vector<std::complex<double>> b(a.size());
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    forward = fftw_plan_dft_2d(static_cast<int>(side), static_cast<int>(side),
                               reinterpret_cast<fftw_complex*>(a.data()),
                               reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward = fftw_plan_dft_2d(static_cast<int>(side), static_cast<int>(side),
                                reinterpret_cast<fftw_complex*>(a.data()),
                                reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
  }

  ~DftPlans() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }

  DftPlans(const DftPlans&) = delete;
  DftPlans& operator=(const DftPlans&) = delete;
};

}  // namespace

LinearOperator partial_dft_operator(Index side,
                                    const std::vector<std::pair<Index, Index>>& mask) {
  if (mask.empty()) throw std::invalid_argument("partial_dft_operator: empty mask");
  const Index npix = side * side;
  const Index nfreq = static_cast<Index>(mask.size());
  auto plans = std::make_shared<DftPlans>(side);
  auto freqs = std::make_shared<std::vector<Index>>();
  freqs->reserve(mask.size());
  for (const auto& uv : mask) {
    if (uv.first < 0 || uv.first >= side || uv.second < 0 || uv.second >= side)
      throw std::invalid_argument("partial_dft_operator: mask index out of range");
    freqs->push_back(uv.first * side + uv.second);
  }
  const double scale = 1.0 / static_cast<double>(side);  // unitary 2D DFT

  auto forward = [plans, freqs, npix, nfreq, scale](const Vector& x) -> Vector {
    std::vector<std::complex<double>> in(static_cast<std::size_t>(npix));
    std::vector<std::complex<double>> out(in.size());
    for (Index j = 0; j < npix; ++j) in[static_cast<std::size_t>(j)] = x[j];
    fftw_execute_dft(plans->forward, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    Vector y(2 * nfreq);
    for (Index k = 0; k < nfreq; ++k) {
      const std::complex<double>& c = out[static_cast<std::size_t>((*freqs)[k])];
      y[k] = c.real() * scale;
      y[nfreq + k] = c.imag() * scale;
    }
    return y;
  };

  auto adjoint = [plans, freqs, npix, nfreq, scale](const Vector& g) -> Vector {
    std::vector<std::complex<double>> in(static_cast<std::size_t>(npix),
                                         std::complex<double>(0.0, 0.0));
    std::vector<std::complex<double>> out(in.size());
    for (Index k = 0; k < nfreq; ++k)
      in[static_cast<std::size_t>((*freqs)[k])] = {g[k], g[nfreq + k]};
    fftw_execute_dft(plans->backward, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    Vector x(npix);
    for (Index j = 0; j < npix; ++j)
      x[j] = out[static_cast<std::size_t>(j)].real() * scale;
    return x;
  };

  return LinearOperator(npix, 2 * nfreq, forward, adjoint);
}

PhantomResult phantom_experiment_on_image(const Vector& image, const PhantomSpec& spec,
                                          double lambda, const SolverConfig& config,
                                          const ContinuationSchedule* schedule) {
  if (image.size() != spec.side * spec.side)
    throw std::invalid_argument("phantom_experiment_on_image: image size mismatch");
  auto mask = radial_mask(spec.side, spec.num_radial_lines);
  AnalysisProblem problem;
  problem.A = partial_dft_operator(spec.side, mask);
  problem.b = problem.A.apply(image);
  if (spec.noise_sigma > 0.0) {
    Rng rng(mix_seed(config.seed, 77));
    problem.b += spec.noise_sigma * rng.gaussian_vector(problem.b.size());
  }
  problem.frame = difference_frame_2d(spec.side, spec.side);
  problem.lambda = lambda;

  PhantomResult result;
  if (schedule)
    result.trace = continuation(problem, schedule->mu0, schedule->muf, schedule->gamma,
                                schedule->inner_iters, config, &image);
  else
    result.trace = sfista(problem, config, &image);
  result.reconstruction = result.trace.final_x;
  result.ground_truth = image;
  result.rel_error = relative_error(result.reconstruction, image);
  result.side = spec.side;
  result.mask_size = mask.size();
  return result;
}

PhantomResult phantom_experiment(const PhantomSpec& spec, double lambda,
                                 const SolverConfig& config,
                                 const ContinuationSchedule* schedule) {
  return phantom_experiment_on_image(make_phantom_image(spec.side), spec, lambda, config,
                                     schedule);
}

// ---------------------------------------------------------------------------
// Certified tiny instances
// ---------------------------------------------------------------------------

namespace {

// Orthonormal bases of range(D_T) for every size-`level` column support of D.
std::vector<Matrix> support_bases(const Matrix& d_star, int level) {
  const Index p = d_star.rows();
  std::vector<Index> support(static_cast<std::size_t>(level));
  std::iota(support.begin(), support.end(), Index{0});
  std::vector<Matrix> bases;
  while (true) {
    Matrix cols(d_star.cols(), level);
    for (int k = 0; k < level; ++k)
      cols.col(k) = d_star.row(support[static_cast<std::size_t>(k)]).transpose();
    Eigen::JacobiSVD<Matrix> svd(cols, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    double tol = 1e-12 * (sv.size() > 0 ? sv[0] : 0.0);
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
      if (sv[i] > tol) ++rank;
    if (rank > 0) bases.push_back(svd.matrixU().leftCols(rank));
    int i = level - 1;
    while (i >= 0 && support[static_cast<std::size_t>(i)] == p - level + i) --i;
    if (i < 0) break;
    ++support[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < level; ++j)
      support[static_cast<std::size_t>(j)] = support[static_cast<std::size_t>(j - 1)] + 1;
  }
  return bases;
}

Matrix orthonormalize(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  Matrix r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  for (Index j = 0; j < m.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

// Softmax-smoothed minimax descent on the kernel U of A: push span(U) away
// from the analysis-support plane it currently overlaps the most. Used as
// the initializer for the direct measurement-matrix polish below.
Matrix optimize_kernel(const std::vector<Matrix>& bases, Index n, Index k_dim,
                       std::uint64_t seed) {
  Rng rng(seed);
  Matrix u = orthonormalize(rng.gaussian_matrix(n, k_dim));
  const int iters = 400;
  const double beta = 250.0;
  double step = 0.2;
  for (int it = 0; it < iters; ++it) {
    std::vector<double> overlap(bases.size());
    std::vector<Vector> top(bases.size());
    double f_max = 0.0;
    for (std::size_t t = 0; t < bases.size(); ++t) {
      Matrix m = bases[t].transpose() * u;
      Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinV);
      overlap[t] = svd.singularValues()[0] * svd.singularValues()[0];
      top[t] = svd.matrixV().col(0);
      f_max = std::max(f_max, overlap[t]);
    }
    double w_sum = 0.0;
    for (double f : overlap) w_sum += std::exp(beta * (f - f_max));
    Matrix grad = Matrix::Zero(n, k_dim);
    for (std::size_t t = 0; t < bases.size(); ++t) {
      double w = std::exp(beta * (overlap[t] - f_max)) / w_sum;
      grad += w * (bases[t] * (bases[t].transpose() * (u * top[t]))) * top[t].transpose();
    }
    u = orthonormalize(u - step * grad);
    step *= 0.997;
  }
  return u;
}

double worst_plane_deviation(const Matrix& a, const std::vector<Matrix>& bases) {
  double worst = 0.0;
  for (const Matrix& basis : bases) {
    Matrix aq = a * basis;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(aq.transpose() * aq);
    worst = std::max(worst, std::max(eig.eigenvalues().maxCoeff() - 1.0,
                                     1.0 - eig.eigenvalues().minCoeff()));
  }
  return worst;
}

// Centers the scale of a so the worst high/low deviations balance.
Matrix recenter_scale(const Matrix& a, const std::vector<Matrix>& bases) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Matrix& basis : bases) {
    Matrix aq = a * basis;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(aq.transpose() * aq);
    lo = std::min(lo, eig.eigenvalues().minCoeff());
    hi = std::max(hi, eig.eigenvalues().maxCoeff());
  }
  return std::sqrt(2.0 / (hi + lo)) * a;
}

// Direct softmax-smoothed minimax descent on the entries of A: drives the
// worst eigenvalue deviation of Q_T^T A^T A Q_T below the partial-isometry
// plateau. All iteration counts are fixed, so the result is a pure function
// of the inputs.
Matrix optimize_measurement(Matrix a, const std::vector<Matrix>& bases) {
  const int iters = 3000;
  const double beta = 400.0;
  double step = 0.05;
  Matrix best = a;
  double best_dev = worst_plane_deviation(a, bases);
  for (int it = 0; it < iters; ++it) {
    std::vector<double> devs(bases.size());
    std::vector<Vector> dirs(bases.size());
    std::vector<double> signs(bases.size());
    double d_max = 0.0;
    for (std::size_t t = 0; t < bases.size(); ++t) {
      Matrix aq = a * bases[t];
      Eigen::SelfAdjointEigenSolver<Matrix> eig(aq.transpose() * aq);
      const auto& ev = eig.eigenvalues();
      double d_hi = ev.maxCoeff() - 1.0;
      double d_lo = 1.0 - ev.minCoeff();
      Index which;
      if (d_hi >= d_lo) {
        ev.maxCoeff(&which);
        devs[t] = d_hi;
        signs[t] = 1.0;
      } else {
        ev.minCoeff(&which);
        devs[t] = d_lo;
        signs[t] = -1.0;
      }
      dirs[t] = bases[t] * eig.eigenvectors().col(which);
      d_max = std::max(d_max, devs[t]);
    }
    double w_sum = 0.0;
    for (double d : devs) w_sum += std::exp(beta * (d - d_max));
    Matrix grad = Matrix::Zero(a.rows(), a.cols());
    for (std::size_t t = 0; t < bases.size(); ++t) {
      double w = std::exp(beta * (devs[t] - d_max)) / w_sum;
      grad += (signs[t] * 2.0 * w) * (a * dirs[t]) * dirs[t].transpose();
    }
    a -= step * grad;
    step *= 0.999;
    if ((it + 1) % 100 == 0) {
      double dev = worst_plane_deviation(a, bases);
      if (dev < best_dev) {
        best_dev = dev;
        best = a;
      }
    }
  }
  Matrix centered = recenter_scale(best, bases);
  return worst_plane_deviation(centered, bases) < best_dev ? centered : best;
}

}  // namespace

CertifiedInstance make_certified_instance(Index n, Index p, Index m, int s,
                                          double lambda, double noise_level,
                                          std::uint64_t seed) {
  if (m < 1 || m > n) throw std::invalid_argument("make_certified_instance: need 1 <= m <= n");
  if (noise_level < 0.0 || noise_level >= 1.0)
    throw std::invalid_argument("make_certified_instance: noise_level in [0, 1)");

  TightFrame frame = random_tight_frame(n, p, mix_seed(seed, 1));

  // Near-isometric A on the 2s-sparse synthesis set: start from a scaled
  // partial isometry whose kernel avoids the analysis planes, then polish
  // the matrix entries directly against the worst plane deviation.
  std::vector<Matrix> bases = support_bases(frame.dense(), 2 * s);
  Matrix a0;
  if (m == n) {
    a0 = Matrix::Identity(n, n);
  } else {
    Matrix kernel = optimize_kernel(bases, n, n - m, mix_seed(seed, 2));
    Eigen::HouseholderQR<Matrix> qr(kernel);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    a0 = q.rightCols(m).transpose();  // orthonormal rows spanning kernel^perp
  }
  Matrix a = optimize_measurement(recenter_scale(a0, bases), bases);

  CosparseSignal sig = cosparse_signal(frame, n - 1, mix_seed(seed, 3));

  Vector b = a * sig.x;
  if (noise_level > 0.0) {
    Rng noise_rng(mix_seed(seed, 4));
    Vector gvec = noise_rng.gaussian_vector(m);
    double witness = (frame.dense() * (a.transpose() * gvec)).lpNorm<Eigen::Infinity>();
    if (witness > 0.0) b += (noise_level * lambda / 2.0 / witness) * gvec;
  }

  CertifiedInstance instance;
  instance.problem.A = LinearOperator::from_matrix(std::move(a));
  instance.problem.b = std::move(b);
  instance.problem.frame = std::move(frame);
  instance.problem.lambda = lambda;
  instance.x_true = sig.x;
  instance.s = s;
  return instance;
}

}  // namespace asr
