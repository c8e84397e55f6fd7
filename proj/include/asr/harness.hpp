#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "asr/certify.hpp"
#include "asr/frames.hpp"
#include "asr/io.hpp"
#include "asr/solvers.hpp"
#include "asr/types.hpp"

namespace asr {

// Raised for malformed or missing configuration; the CLI maps it to exit 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat `key = value` text config with '#' comments. Later set() calls (flag
// overrides) win. Keys keep insertion order for the run manifest.
class ConfigMap {
 public:
  static ConfigMap from_file(const std::string& path);
  ConfigMap() = default;

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string require_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  double require_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  std::int64_t require_int(const std::string& key) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_seed_or(const std::string& key, std::uint64_t fallback) const;
  // Comma-separated list of reals.
  std::vector<double> require_list(const std::string& key) const;
  std::vector<double> get_list_or(const std::string& key,
                                  std::vector<double> fallback) const;

  // Manifest = resolved config + seed + version, same flat format.
  void write_manifest(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& extra) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  const std::string* find(const std::string& key) const;
};

struct ExperimentConfig {
  std::string kind;             // phase-diagram | compare | phantom | certify
  std::string solver = "sfista";
  Index n = 0;
  Index p = 0;
  std::vector<double> alpha_grid;
  std::vector<double> beta_grid;
  double lambda = 0.0;
  double mu = 0.0;
  double rho = 0.0;
  int iters = 3000;
  int trials = 10;
  double noise_sigma = 0.0;
  std::uint64_t master_seed = 0;
  std::string output_path;
  int threads = 0;  // max parallelism; 0 = hardware concurrency
};

struct PhantomSpec {
  Index side = 64;
  int num_radial_lines = 15;
  double noise_sigma = 0.0;
};

struct GridCell {
  double alpha = 0.0;
  double beta = 0.0;
  double mean_err = 0.0;
  double std_err = 0.0;
  int trials = 0;    // successful trials aggregated
  int failures = 0;  // solver aborts, recorded and skipped
};

struct GridResult {
  std::vector<GridCell> cells;
  void to_csv(const std::string& path) const;
};

struct ProblemInstance {
  AnalysisProblem problem;
  Vector x_true;
};

// Relative reconstruction error ||x_hat - x|| / ||x||.
double relative_error(const Vector& x_hat, const Vector& x_true);

// b = A x_true + w with A i.i.d. standard normal (no column normalization),
// x_true a unit-norm l-cosparse draw, w i.i.d. N(0, noise_sigma^2).
ProblemInstance make_problem(Index n, Index m, const TightFrame& frame, Index l,
                             double noise_sigma, std::uint64_t seed, double lambda);

// Monte Carlo sweep over the (alpha, beta) grid: m = round(alpha*n),
// l = round(n - beta*m), fresh frame/problem per trial, `iters` solver
// iterations, mean/stddev of the relative error per cell.
GridResult phase_diagram(const ExperimentConfig& config);

struct LabeledRun {
  std::string label;
  SolverConfig config;
};

struct LabeledTrace {
  std::string label;
  IterateTrace trace;
};

// Runs each config on the same problem instance (concurrently; inputs are
// shared immutable).
std::vector<LabeledTrace> compare_solvers(const AnalysisProblem& problem,
                                          const std::vector<LabeledRun>& runs,
                                          const Vector* x_true = nullptr,
                                          int threads = 0);

// Summary rows (label x checkpoint) of objective / true objective / error.
CsvTable compare_summary(const std::vector<LabeledTrace>& traces,
                         const std::vector<int>& checkpoints);

// Piecewise-constant concentric-ellipse image with values in [0, 1],
// vectorized row-major.
Vector make_phantom_image(Index side);

// Centered radial-line frequency mask; always contains DC. A line count of
// 2*side or more selects the full grid (clamped, with a warning).
std::vector<std::pair<Index, Index>> radial_mask(Index side, int num_lines);

// Real operator stacking [Re; Im] of the unitary 2D DFT restricted to the
// mask. in_dim = side^2, out_dim = 2*mask.size().
LinearOperator partial_dft_operator(Index side,
                                    const std::vector<std::pair<Index, Index>>& mask);

struct ContinuationSchedule {
  double mu0 = 0.0;
  double muf = 0.0;
  double gamma = 10.0;
  int inner_iters = 0;
};

struct PhantomResult {
  IterateTrace trace;
  Vector reconstruction;
  Vector ground_truth;
  double rel_error = 0.0;
  Index side = 0;
  std::size_t mask_size = 0;
};

// Builds the phantom, samples its spectrum on the radial mask, adds
// measurement noise, and reconstructs with a smoothed run (optionally with
// continuation on mu).
PhantomResult phantom_experiment(const PhantomSpec& spec, double lambda,
                                 const SolverConfig& config,
                                 const ContinuationSchedule* schedule = nullptr);

// Same as phantom_experiment but on a caller-provided image.
PhantomResult phantom_experiment_on_image(const Vector& image, const PhantomSpec& spec,
                                          double lambda, const SolverConfig& config,
                                          const ContinuationSchedule* schedule = nullptr);

// Near-isometric tiny instance for the certification pipeline: A is a
// rescaled row-subsampled Haar orthogonal matrix (centered so the
// restricted-isometry deviation is minimal), the truth is maximally
// cosparse, and the noise is scaled to satisfy ||D*A^Tw||_inf <= lambda/2.
struct CertifiedInstance {
  AnalysisProblem problem;
  Vector x_true;
  int s = 0;
};
CertifiedInstance make_certified_instance(Index n, Index p, Index m, int s,
                                          double lambda, double noise_level,
                                          std::uint64_t seed);

// Entry point behind tools/asrtk. Subcommands: phase-diagram, compare,
// phantom, certify, drip, estimate-iters. Exit codes: 0 ok, 1 runtime
// failure, 2 configuration error.
int run_cli(int argc, char** argv);

}  // namespace asr
