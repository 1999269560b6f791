// necrostrip — command-line laboratory for the two-boundary tumor strip
// model: flat stationary states, linearized spectra, and nonlinear
// moving-boundary evolution with deterministic CSV/JSON artifacts.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "necrostrip/elliptic.hpp"
#include "necrostrip/errors.hpp"
#include "necrostrip/evolution.hpp"
#include "necrostrip/format.hpp"
#include "necrostrip/grid.hpp"
#include "necrostrip/io.hpp"
#include "necrostrip/params.hpp"
#include "necrostrip/spectrum.hpp"

namespace {

using namespace necrostrip;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Path to the JSON config file")
      ->required();
  cmd->add_option("--out", opts.out_dir,
                  "Output directory (overrides output.directory)");
  cmd->add_option("--override", opts.overrides,
                  "Config override KEY=VALUE with dotted KEY paths (repeatable)");
}

io::RunConfig load_config(const CommonOpts& opts) {
  nlohmann::json root = io::load_json_file(opts.config_path);
  for (const std::string& ov : opts.overrides) io::apply_override(root, ov);
  if (!opts.out_dir.empty()) {
    if (!root.contains("output") || !root.at("output").is_object())
      root["output"] = nlohmann::json::object();
    root["output"]["directory"] = opts.out_dir;
  }
  io::RunConfig cfg = io::parse_config(root);
  cfg.params = validate_params(cfg.params);
  return cfg;
}

/** Timestamped append-only log; the only artifact allowed to differ between
 *  repeated runs of the same config (data files stay byte-identical). */
class RunLog {
 public:
  explicit RunLog(const std::string& dir)
      : path_((std::filesystem::path(dir) / "run.log").string()), dir_(dir) {}

  void line(const std::string& message) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    std::ofstream out(path_, std::ios::app);
    if (!out) return;  // logging is best-effort by design
    std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    out << '[' << stamp << "] " << message << '\n';
  }

 private:
  std::string path_;
  std::string dir_;
};

/** Parallelism cap for the sweep: NECROSTRIP_THREADS if set (strictly a
 *  positive integer), otherwise the hardware concurrency. */
std::size_t sweep_parallelism(std::size_t n_jobs) {
  std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NECROSTRIP_THREADS")) {
    const std::string text(env);
    std::size_t value = 0;
    bool ok = !text.empty();
    for (char c : text) {
      if (c < '0' || c > '9') {
        ok = false;
        break;
      }
      value = value * 10 + static_cast<std::size_t>(c - '0');
      if (value > 4096) break;
    }
    if (!ok || value == 0)
      throw Error(ErrorKind::ConfigError,
                  "NECROSTRIP_THREADS must be a positive integer, got '" +
                      text + "'");
    cap = value;
  }
  return std::max<std::size_t>(1, std::min(cap, n_jobs));
}

/** Computes gamma_star over config.nu_grid (possibly concurrently; results
 *  are slot-indexed so ordering is independent of the fan-out) and writes
 *  gamma_star_vs_nu.csv sorted by nu. */
void run_nu_sweep(const io::RunConfig& cfg, RunLog& log) {
  const std::vector<double>& nu_grid = cfg.nu_grid;
  const std::size_t n = nu_grid.size();
  std::vector<double> values(n, 0.0);
  std::vector<std::exception_ptr> errors(n);

  auto job = [&](std::size_t i) {
    try {
      TumorParams p = cfg.params;
      p.nu = nu_grid[i];
      p = validate_params(p);
      const FlatStationary fs = flat_stationary(p);
      const GammaStarResult gs = gamma_star(p, fs, cfg.k_max);
      if (!gs.tail_bound_ok)
        throw Error(ErrorKind::TailNotCertified,
                    "sweep at nu=" + fmt17(p.nu) + ": tail bound " +
                        fmt17(gs.tail_bound) +
                        " does not certify gamma_star at K_max=" +
                        std::to_string(cfg.k_max));
      values[i] = gs.value;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const std::size_t n_workers = sweep_parallelism(n);
  if (n_workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += n_workers) job(i);
      });
    for (std::thread& t : pool) t.join();
  }
  for (std::size_t i = 0; i < n; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);

  std::vector<std::pair<double, double>> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = {nu_grid[i], values[i]};
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> nu_sorted(n), gs_sorted(n);
  for (std::size_t i = 0; i < n; ++i) {
    nu_sorted[i] = rows[i].first;
    gs_sorted[i] = rows[i].second;
  }
  io::write_gamma_star_vs_nu_csv(cfg.output_directory, cfg, nu_sorted,
                                 gs_sorted);
  log.line("sweep: wrote gamma_star_vs_nu.csv (" + std::to_string(n) +
           " values, " + std::to_string(n_workers) + " workers)");
}

int cmd_stationary(const io::RunConfig& cfg) {
  RunLog log(cfg.output_directory);
  log.line("stationary: start");
  const double sigma_star =
      existence_threshold(cfg.params.sigma_hat, cfg.params.sigma_tilde);
  const FlatStationary fs = flat_stationary(cfg.params);
  const StationaryResidualReport report =
      verify_stationary_residual(fs, cfg.params, 2048);
  io::write_stationary_json(cfg.output_directory, cfg, fs, sigma_star, report);
  io::write_profiles_csv(cfg.output_directory, cfg, fs);
  std::cout << "stationary: eta_s=" << fmt17(fs.eta_s)
            << " rho_s=" << fmt17(fs.rho_s) << " p0=" << fmt17(fs.p0)
            << " sigma_star=" << fmt17(sigma_star)
            << " residual_max_abs=" << fmt17(report.max_abs) << '\n';
  log.line("stationary: ok");
  return 0;
}

int cmd_spectrum(const io::RunConfig& cfg) {
  RunLog log(cfg.output_directory);
  log.line("spectrum: start");
  const FlatStationary fs = flat_stationary(cfg.params);
  const SpectrumReport report =
      classify_stability(cfg.params, fs, cfg.params.gamma, cfg.k_max);
  io::write_spectrum_csv(cfg.output_directory, cfg, fs);
  io::write_threshold_json(cfg.output_directory, cfg, report);
  const char* cls = io::classification_name(report.classification);
  std::cout << "spectrum: gamma=" << fmt17(report.gamma)
            << " gamma_star=" << fmt17(report.gamma_star) << " argmax_k=";
  for (std::size_t i = 0; i < report.argmax_k.size(); ++i)
    std::cout << (i ? "," : "") << report.argmax_k[i];
  std::cout << " classification=" << cls << " varpi=" << fmt17(report.varpi)
            << '\n';
  if (!cfg.nu_grid.empty()) run_nu_sweep(cfg, log);
  log.line("spectrum: ok");
  return 0;
}

int cmd_simulate(const io::RunConfig& cfg) {
  if (!cfg.has_evolution)
    throw Error(ErrorKind::ConfigError,
                "simulate requires an 'evolution' block in the config");
  RunLog log(cfg.output_directory);
  log.line("simulate: start");
  const FlatStationary fs = flat_stationary(cfg.params);
  const GridConfig gc{cfg.nx, cfg.ny};
  const std::vector<double> rho0 = io::build_rho0(cfg);

  auto write_snapshot = [&](const std::vector<double>& rho,
                            const char* stage) {
    try {
      const StripGrid grid = build_grid(cfg.nx, cfg.ny, fs, rho);
      const ObstacleSolution obs =
          solve_nutrient_obstacle(grid, cfg.params, fs);
      const PressureSolution ps =
          solve_pressure(grid, cfg.params, fs, obs, cfg.params.gamma);
      io::write_field_snapshot_csv(cfg.output_directory, "snapshot_final.csv",
                                   cfg, grid, obs.sigma_field, ps.p_field,
                                   obs.active_mask);
      log.line(std::string("simulate: wrote snapshot_final.csv (") + stage +
               ")");
    } catch (const Error& e) {
      log.line(std::string("simulate: snapshot skipped: ") + e.what());
    }
  };

  Trajectory partial;
  Trajectory traj;
  try {
    traj = simulate(rho0, cfg.params, fs, cfg.params.gamma, cfg.T, cfg.dt0, gc,
                    &partial);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::MinStepReached && !partial.times.empty()) {
      io::write_trajectory_csv(cfg.output_directory, cfg, partial);
      io::write_rates_json(cfg.output_directory, cfg, fs, partial, e.what());
      write_snapshot(partial.rho_snapshots.back(), "last accepted state");
      log.line(std::string("simulate: aborted: ") + e.what());
    }
    throw;
  }
  io::write_trajectory_csv(cfg.output_directory, cfg, traj);
  io::write_rates_json(cfg.output_directory, cfg, fs, traj, "");
  write_snapshot(traj.rho_snapshots.back(), "final state");

  const char* stop = traj.stop_reason == StopReason::ReachedT
                         ? "reached_T"
                         : traj.stop_reason == StopReason::BlowupGuard
                               ? "blowup_guard"
                               : "converged_to_zero";
  const std::vector<double>& last = traj.rho_snapshots.back();
  double amp = 0.0;
  for (double v : last) amp = std::max(amp, std::fabs(v));
  std::cout << "simulate: steps=" << traj.times.size() - 1
            << " t_final=" << fmt17(traj.times.back()) << " stop=" << stop
            << " max_abs_rho=" << fmt17(amp) << '\n';
  log.line("simulate: ok");
  return 0;
}

int cmd_jacobian(const io::RunConfig& cfg) {
  RunLog log(cfg.output_directory);
  log.line("jacobian: start");
  if (cfg.jac_k_min < 0 || cfg.jac_k_max < cfg.jac_k_min ||
      cfg.jac_k_max > cfg.nx / 2)
    throw Error(ErrorKind::ConfigError,
                "jacobian k range [" + std::to_string(cfg.jac_k_min) + ", " +
                    std::to_string(cfg.jac_k_max) +
                    "] must satisfy 0 <= k_min <= k_max <= nx/2");
  const FlatStationary fs = flat_stationary(cfg.params);
  const GridConfig gc{cfg.nx, cfg.ny};
  std::vector<io::JacobianRow> rows;
  double max_rel = 0.0;
  double max_leak = 0.0;
  for (int k = cfg.jac_k_min; k <= cfg.jac_k_max; ++k) {
    const JacobianProbe probe =
        numerical_jacobian_mode(k, cfg.jac_epsilon, cfg.params, fs,
                                cfg.params.gamma, gc);
    const double lam = lambda_k(cfg.params, fs, k, cfg.params.gamma);
    io::JacobianRow row;
    row.k = k;
    row.lambda_hat = probe.lambda_hat;
    row.lambda_closed_form = lam;
    row.rel_err =
        std::fabs(probe.lambda_hat - lam) / std::max(1.0, std::fabs(lam));
    row.leakage = probe.leakage;
    max_rel = std::max(max_rel, row.rel_err);
    max_leak = std::max(max_leak, row.leakage);
    rows.push_back(row);
  }
  io::write_jacobian_csv(cfg.output_directory, cfg, rows);
  std::cout << "jacobian: k=[" << cfg.jac_k_min << "," << cfg.jac_k_max
            << "] epsilon=" << fmt17(cfg.jac_epsilon)
            << " max_rel_err=" << fmt17(max_rel)
            << " max_leakage=" << fmt17(max_leak) << '\n';
  log.line("jacobian: ok");
  return 0;
}

int cmd_sweep(const io::RunConfig& cfg) {
  if (cfg.nu_grid.empty())
    throw Error(ErrorKind::ConfigError,
                "sweep requires a non-empty 'spectral.nu_grid' array");
  RunLog log(cfg.output_directory);
  log.line("sweep: start");
  run_nu_sweep(cfg, log);
  std::cout << "sweep: " << cfg.nu_grid.size()
            << " nu values -> gamma_star_vs_nu.csv" << '\n';
  log.line("sweep: ok");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "necrostrip: numerical laboratory for a two-boundary necrotic tumor "
      "strip model (stationary states, linearized spectrum, nonlinear "
      "moving-boundary evolution)"};
  app.require_subcommand(1);

  CommonOpts opt_stationary, opt_spectrum, opt_simulate, opt_jacobian,
      opt_sweep;
  CLI::App* sub_stationary = app.add_subcommand(
      "stationary", "Flat stationary solution, threshold, residual report");
  add_common_flags(sub_stationary, opt_stationary);
  CLI::App* sub_spectrum = app.add_subcommand(
      "spectrum", "Closed-form spectrum, gamma_star, stability classification");
  add_common_flags(sub_spectrum, opt_spectrum);
  CLI::App* sub_simulate = app.add_subcommand(
      "simulate", "Nonlinear moving-boundary evolution with fitted rates");
  add_common_flags(sub_simulate, opt_simulate);
  CLI::App* sub_jacobian = app.add_subcommand(
      "jacobian", "Discrete Jacobian probes against the closed-form spectrum");
  add_common_flags(sub_jacobian, opt_jacobian);
  CLI::App* sub_sweep = app.add_subcommand(
      "sweep", "gamma_star over a nu grid (concurrent, deterministic order)");
  add_common_flags(sub_sweep, opt_sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sub_stationary) return cmd_stationary(load_config(opt_stationary));
    if (*sub_spectrum) return cmd_spectrum(load_config(opt_spectrum));
    if (*sub_simulate) return cmd_simulate(load_config(opt_simulate));
    if (*sub_jacobian) return cmd_jacobian(load_config(opt_jacobian));
    if (*sub_sweep) return cmd_sweep(load_config(opt_sweep));
  } catch (const necrostrip::Error& e) {
    std::cerr << "necrostrip: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "necrostrip: internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
