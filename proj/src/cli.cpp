#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "asr/certify.hpp"
#include "asr/harness.hpp"
#include "asr/io.hpp"
#include "asr/rng.hpp"

namespace asr {

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

// Relative output paths land in $ASRTK_OUTPUT_DIR when it is set.
std::string resolve_output(const std::string& path) {
  const char* dir = std::getenv("ASRTK_OUTPUT_DIR");
  if (!dir || !*dir) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(dir) / p).string();
}

struct CommonFlags {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> iters;
  std::optional<int> trials;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required = true) {
  auto* opt = cmd->add_option("--config", flags.config_path, "flat key = value config file");
  if (config_required) opt->required();
  cmd->add_option("--out", flags.out, "output path (overrides config `out`)");
  cmd->add_option("--seed", flags.seed, "master seed (overrides config `seed`)");
  cmd->add_option("--iters", flags.iters, "iteration budget override");
  cmd->add_option("--trials", flags.trials, "Monte Carlo trials override");
  cmd->add_option("--threads", flags.threads, "max parallel workers (0 = all cores)");
}

ConfigMap load_config(const CommonFlags& flags) {
  ConfigMap map =
      flags.config_path.empty() ? ConfigMap() : ConfigMap::from_file(flags.config_path);
  if (flags.out) map.set("out", *flags.out);
  if (flags.seed) map.set("seed", std::to_string(*flags.seed));
  if (flags.iters) map.set("iters", std::to_string(*flags.iters));
  if (flags.trials) map.set("trials", std::to_string(*flags.trials));
  if (flags.threads) map.set("threads", std::to_string(*flags.threads));
  return map;
}

std::vector<int> default_checkpoints(int budget) {
  std::vector<int> points;
  for (int k : {1, 10, 50, 100, 500, 1000, 3000, 10000})
    if (k <= budget) points.push_back(k);
  if (points.empty() || points.back() != budget) points.push_back(budget);
  return points;
}

int cmd_phase_diagram(const ConfigMap& map) {
  ExperimentConfig config;
  config.kind = "phase-diagram";
  config.solver = map.get_string_or("solver", "sfista");
  config.n = map.require_int("n");
  config.p = map.require_int("p");
  config.lambda = map.require_double("lambda");
  config.alpha_grid = map.require_list("alpha_grid");
  config.beta_grid = map.require_list("beta_grid");
  config.mu = map.get_double_or("mu", 0.0);
  config.rho = map.get_double_or("rho", 0.0);
  config.iters = static_cast<int>(map.get_int_or("iters", 3000));
  config.trials = static_cast<int>(map.get_int_or("trials", 10));
  config.noise_sigma = map.get_double_or("noise_sigma", 0.0);
  config.master_seed = map.get_seed_or("seed", 0);
  config.threads = static_cast<int>(map.get_int_or("threads", 0));
  config.output_path = resolve_output(map.require_string("out"));

  GridResult grid = phase_diagram(config);
  grid.to_csv(config.output_path);
  map.write_manifest(config.output_path + ".manifest",
                     {{"resolved_out", config.output_path}});
  int failures = 0;
  for (const auto& cell : grid.cells) failures += cell.failures;
  std::cout << "phase-diagram: wrote " << grid.cells.size() << " cells to "
            << config.output_path << " (" << failures << " failed trials)\n";
  return 0;
}

int cmd_compare(const ConfigMap& map) {
  const Index n = map.require_int("n");
  const Index p = map.require_int("p");
  const Index m = map.require_int("m");
  const Index l = map.require_int("l");
  const double lambda = map.require_double("lambda");
  const double noise_sigma = map.get_double_or("noise_sigma", 0.0);
  const int iters = static_cast<int>(map.get_int_or("iters", 3000));
  const std::uint64_t seed = map.get_seed_or("seed", 0);
  const int threads = static_cast<int>(map.get_int_or("threads", 0));
  const std::string out = resolve_output(map.require_string("out"));

  TightFrame frame = random_tight_frame(n, p, mix_seed(seed, 10));
  ProblemInstance instance = make_problem(n, m, frame, l, noise_sigma, seed, lambda);

  std::vector<LabeledRun> runs;
  for (double mu : map.get_list_or("mu_list", {})) {
    SolverConfig config;
    config.mu = mu;
    config.max_iters = iters;
    config.seed = seed;
    runs.push_back({"sfista_mu" + format_double(mu), config});
  }
  for (double rho : map.get_list_or("rho_list", {})) {
    SolverConfig config;
    config.rho = rho;
    config.max_iters = iters;
    config.seed = seed;
    runs.push_back({"dfista_rho" + format_double(rho), config});
  }
  if (runs.empty()) throw ConfigError("compare: need mu_list and/or rho_list");

  auto traces = compare_solvers(instance.problem, runs, &instance.x_true, threads);
  std::vector<std::pair<std::string, std::string>> extra = {{"resolved_out", out}};
  for (std::size_t i = 0; i < traces.size(); ++i) {
    std::string path = out + "_" + traces[i].label + ".csv";
    traces[i].trace.to_csv(path);
    extra.emplace_back("run" + std::to_string(i), traces[i].label);
  }
  write_csv(out + "_summary.csv", compare_summary(traces, default_checkpoints(iters)));
  map.write_manifest(out + ".manifest", extra);
  std::cout << "compare: wrote " << traces.size() << " traces and summary to " << out
            << "_*.csv\n";
  return 0;
}

int cmd_phantom(const ConfigMap& map) {
  PhantomSpec spec;
  spec.side = map.get_int_or("side", 64);
  spec.num_radial_lines = static_cast<int>(map.get_int_or("lines", 15));
  spec.noise_sigma = map.get_double_or("noise_sigma", 0.0);
  const double lambda = map.require_double("lambda");
  const std::string out = resolve_output(map.require_string("out"));

  SolverConfig config;
  config.max_iters = static_cast<int>(map.get_int_or("iters", 3000));
  config.seed = map.get_seed_or("seed", 0);
  config.mu = map.require_double("mu");

  std::optional<ContinuationSchedule> schedule;
  if (map.get_int_or("continuation", 0) != 0) {
    ContinuationSchedule sched;
    sched.mu0 = map.require_double("mu0");
    sched.muf = map.require_double("muf");
    sched.gamma = map.get_double_or("gamma", 10.0);
    sched.inner_iters = static_cast<int>(map.get_int_or("inner_iters", 500));
    schedule = sched;
  }

  PhantomResult result = phantom_experiment(spec, lambda, config,
                                            schedule ? &*schedule : nullptr);
  result.trace.to_csv(out + "_trace.csv", schedule.has_value());
  save_vector(out + "_reconstruction.bin", result.reconstruction);
  save_vector(out + "_ground_truth.bin", result.ground_truth);
  CsvTable summary;
  summary.columns = {"side", "lines", "mask_size", "iterations", "rel_error"};
  summary.rows.push_back({static_cast<double>(result.side),
                          static_cast<double>(spec.num_radial_lines),
                          static_cast<double>(result.mask_size),
                          static_cast<double>(result.trace.iterations()),
                          result.rel_error});
  write_csv(out + "_result.csv", summary);
  map.write_manifest(out + ".manifest", {{"resolved_out", out}});
  std::cout << "phantom: rel_error = " << format_double(result.rel_error) << ", "
            << result.trace.iterations() << " iterations, outputs at " << out
            << "_*.csv\n";
  return 0;
}

int cmd_certify(const ConfigMap& map) {
  const Index n = map.require_int("n");
  const Index p = map.require_int("p");
  const Index m = map.require_int("m");
  const int s = static_cast<int>(map.require_int("s"));
  const double lambda = map.require_double("lambda");
  const double rho = map.get_double_or("rho", 1.0e3);
  const double noise_level = map.get_double_or("noise_level", 0.5);
  const int iters = static_cast<int>(map.get_int_or("iters", 20000));
  const std::uint64_t seed = map.get_seed_or("seed", 0);
  const std::string out = resolve_output(map.require_string("out"));

  CertifiedInstance instance =
      make_certified_instance(n, p, m, s, lambda, noise_level, seed);
  SolverConfig config;
  config.rho = rho;
  config.max_iters = iters;
  config.seed = seed;
  IterateTrace trace = dfista(instance.problem, config, &instance.x_true);

  DripEstimate drip = drip_exhaustive(instance.problem.A, instance.problem.frame, 2 * s);
  CertificateReport report =
      error_bound(instance.problem, instance.x_true, trace.final_x, rho, s, drip);
  report.to_csv(out + "_certificate.csv");
  map.write_manifest(out + ".manifest", {{"resolved_out", out}});
  std::cout << report.to_text();
  std::cout << "certify: report written to " << out << "_certificate.csv\n";
  return 0;
}

int cmd_drip(const ConfigMap& map) {
  const Index n = map.require_int("n");
  const Index p = map.require_int("p");
  const Index m = map.require_int("m");
  const int s = static_cast<int>(map.require_int("s"));
  const std::string method = map.get_string_or("method", "exhaustive");
  const int trials = static_cast<int>(map.get_int_or("trials", 500));
  const std::uint64_t seed = map.get_seed_or("seed", 0);
  const std::string out = resolve_output(map.require_string("out"));

  TightFrame frame = random_tight_frame(n, p, mix_seed(seed, 10));
  Rng rng(mix_seed(seed, 11));
  // 1/sqrt(m)-scaled Gaussian rows: the standard near-isometry normalization.
  Matrix a = rng.gaussian_matrix(m, n) / std::sqrt(static_cast<double>(m));
  LinearOperator a_op = LinearOperator::from_matrix(std::move(a));

  DripEstimate est;
  if (method == "exhaustive")
    est = drip_exhaustive(a_op, frame, s, static_cast<int>(map.get_int_or("threads", 0)));
  else if (method == "randomized")
    est = drip_randomized_lb(a_op, frame, s, trials, mix_seed(seed, 12));
  else
    throw ConfigError("key `method`: expected exhaustive or randomized");

  CsvTable table;
  table.columns = {"s", "sigma_s", "exhaustive", "supports_checked"};
  table.rows.push_back({static_cast<double>(est.s), est.sigma_s,
                        est.method == DripEstimate::Method::kExhaustive ? 1.0 : 0.0,
                        static_cast<double>(est.supports_checked)});
  write_csv(out, table);
  map.write_manifest(out + ".manifest", {{"resolved_out", out}});
  std::cout << "drip: sigma_" << est.s << " = " << format_double(est.sigma_s) << " ("
            << (est.method == DripEstimate::Method::kExhaustive ? "exhaustive"
                                                                : "randomized lower bound")
            << ", " << est.supports_checked << " supports)\n";
  return 0;
}

int cmd_estimate_iters(const ConfigMap& map) {
  double L_g;
  if (map.has("L_g")) {
    L_g = map.require_double("L_g");
  } else {
    // l1 analysis term: L_g = lambda * sqrt(p)
    double lambda = map.require_double("lambda");
    double p = map.require_double("p");
    L_g = lambda * std::sqrt(p);
  }
  const double L_f = map.require_double("L_f");
  const double Lambda = map.require_double("Lambda");
  const double eps = map.require_double("eps");
  const double H0 = map.require_double("H0");
  const double d_norm = map.get_double_or("d_norm", 1.0);

  IterationEstimate est = iteration_estimates(L_g, L_f, Lambda, eps, H0, d_norm);
  std::cout << "eps              = " << format_double(est.target_eps) << "\n"
            << "K_smoothing      = " << format_double(est.K_smoothing) << "\n"
            << "mu_star          = " << format_double(est.mu_star) << "\n"
            << "K_decomposition  = " << format_double(est.K_decomposition) << "\n"
            << "rho_star         = " << format_double(est.rho_star) << "\n";
  if (map.has("out")) {
    const std::string out = resolve_output(map.require_string("out"));
    CsvTable table;
    table.columns = {"eps", "K_smoothing", "mu_star", "K_decomposition", "rho_star"};
    table.rows.push_back(
        {est.target_eps, est.K_smoothing, est.mu_star, est.K_decomposition, est.rho_star});
    write_csv(out, table);
  }
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"analysis sparse recovery toolkit"};
  app.require_subcommand(1);

  CommonFlags pd_flags, cmp_flags, ph_flags, ct_flags, dr_flags, ei_flags;
  auto* pd = app.add_subcommand("phase-diagram", "Monte Carlo (alpha, beta) error grid");
  add_common(pd, pd_flags);
  std::optional<std::string> pd_solver;
  pd->add_option("--solver", pd_solver, "sfista or dfista")->ignore_case();

  auto* cmp = app.add_subcommand("compare", "run solver grid on one pinned instance");
  add_common(cmp, cmp_flags);

  auto* ph = app.add_subcommand("phantom", "piecewise-constant phantom reconstruction");
  add_common(ph, ph_flags);

  auto* ct = app.add_subcommand("certify", "recovery-bound certificate on a tiny instance");
  add_common(ct, ct_flags);

  auto* dr = app.add_subcommand("drip", "restricted isometry constant estimation");
  add_common(dr, dr_flags);

  auto* ei = app.add_subcommand("estimate-iters", "iteration-count calculators");
  add_common(ei, ei_flags, /*config_required=*/false);
  std::optional<double> ei_eps, ei_lg, ei_lf, ei_lambda_cap, ei_h0, ei_dnorm, ei_lambda, ei_p;
  ei->add_option("--eps", ei_eps, "target accuracy");
  ei->add_option("--L-g", ei_lg, "Lipschitz constant of the nonsmooth term");
  ei->add_option("--L-f", ei_lf, "gradient Lipschitz constant of the smooth term");
  ei->add_option("--Lambda", ei_lambda_cap, "squared distance-to-optimum estimate");
  ei->add_option("--H0", ei_h0, "objective value at the initial point");
  ei->add_option("--d-norm", ei_dnorm, "spectral norm of D (default 1)");
  ei->add_option("--lambda", ei_lambda, "l1 weight (used when --L-g is absent)");
  ei->add_option("--p", ei_p, "analysis dimension (used when --L-g is absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (pd->parsed()) {
      ConfigMap map = load_config(pd_flags);
      if (pd_solver) map.set("solver", *pd_solver);
      return cmd_phase_diagram(map);
    }
    if (cmp->parsed()) return cmd_compare(load_config(cmp_flags));
    if (ph->parsed()) return cmd_phantom(load_config(ph_flags));
    if (ct->parsed()) return cmd_certify(load_config(ct_flags));
    if (dr->parsed()) return cmd_drip(load_config(dr_flags));
    if (ei->parsed()) {
      ConfigMap map = load_config(ei_flags);
      if (ei_eps) map.set("eps", format_double(*ei_eps));
      if (ei_lg) map.set("L_g", format_double(*ei_lg));
      if (ei_lf) map.set("L_f", format_double(*ei_lf));
      if (ei_lambda_cap) map.set("Lambda", format_double(*ei_lambda_cap));
      if (ei_h0) map.set("H0", format_double(*ei_h0));
      if (ei_dnorm) map.set("d_norm", format_double(*ei_dnorm));
      if (ei_lambda) map.set("lambda", format_double(*ei_lambda));
      if (ei_p) map.set("p", format_double(*ei_p));
      return cmd_estimate_iters(map);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace asr
