// acceptance.cpp — the release gate for the necrostrip laboratory.
//
// Usage: acceptance <path-to-necrostrip-cli> <scratch-dir>
//
// Runs the full acceptance checklist against the library and the CLI,
// printing one [PASS]/[FAIL] line per criterion with the measured numbers,
// and exits with the count of failed criteria (0 when everything holds).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "necrostrip/bvp_oracle.hpp"
#include "necrostrip/elliptic.hpp"
#include "necrostrip/errors.hpp"
#include "necrostrip/evolution.hpp"
#include "necrostrip/format.hpp"
#include "necrostrip/grid.hpp"
#include "necrostrip/params.hpp"
#include "necrostrip/spectrum.hpp"

using namespace necrostrip;
namespace fs_std = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string measured;
};

int g_failures = 0;

void run_criterion(int n, const std::string& description,
                   const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.measured = std::string("exception: ") + e.what();
  }
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t0)
          .count();
  std::printf("[%s] %2d. %s (%s; %.1f ms)\n", out.pass ? "PASS" : "FAIL", n,
              description.c_str(), out.measured.c_str(), ms);
  std::fflush(stdout);
  if (!out.pass) ++g_failures;
}

TumorParams p0_params(double gamma = 1.0) {
  TumorParams p;
  p.sigma_bar = 6.0;
  p.sigma_tilde = 2.0;
  p.sigma_hat = 1.0;
  p.mu = 1.0;
  p.nu = 1.0;
  p.gamma = gamma;
  return validate_params(p);
}

double k3_tanh(double k, double rho_s) {
  return k * k * k * std::tanh(k * rho_s);
}

std::vector<double> cosine(int nx, int k, double amplitude) {
  std::vector<double> v(nx);
  for (int i = 0; i < nx; ++i)
    v[i] = amplitude * std::cos(k * 2.0 * std::numbers::pi * i / nx);
  return v;
}

// ---------------------------------------------------------------------------
// CLI determinism helpers (criterion 11)
// ---------------------------------------------------------------------------

std::string g_binary;
fs_std::path g_scratch;

void write_file(const fs_std::path& path, const std::string& content) {
  fs_std::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

std::string slurp(const fs_std::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/** All regular files under dir, keyed by relative path; run.log excluded
 *  (it is the one deliberately timestamped artifact). */
std::map<std::string, std::string> collect_outputs(const fs_std::path& dir) {
  std::map<std::string, std::string> files;
  if (!fs_std::exists(dir)) return files;
  for (const auto& entry : fs_std::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs_std::relative(entry.path(), dir).string();
    if (rel == "run.log") continue;
    files[rel] = slurp(entry.path());
  }
  return files;
}

int run_cli(const std::string& subcommand, const fs_std::path& config,
            const fs_std::path& out_dir, const fs_std::path& log,
            const std::string& env_prefix) {
  const std::string cmd = env_prefix + "\"" + g_binary + "\" " + subcommand +
                          " --config \"" + config.string() + "\" --out \"" +
                          out_dir.string() + "\" > \"" + log.string() +
                          "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc;
}

struct CliCase {
  std::string subcommand;
  std::string config_name;
  std::string config_text;
  std::string env_prefix;  // e.g. "NECROSTRIP_THREADS=3 "
};

Outcome check_cli_determinism() {
  const std::string params =
      "  \"params\": { \"sigma_bar\": 6.0, \"sigma_tilde\": 2.0, "
      "\"sigma_hat\": 1.0, \"mu\": 1.0, \"nu\": 1.0, \"gamma\": 1.0 },\n";
  std::vector<CliCase> cases;
  cases.push_back({"stationary", "stationary.json",
                   "{\n" + params +
                       "  \"grid\": { \"nx\": 32, \"ny\": 64 },\n"
                       "  \"spectral\": { \"K_max\": 16 },\n"
                       "  \"output\": { \"directory\": \"out\" }\n}\n",
                   ""});
  cases.push_back({"spectrum", "spectrum.json",
                   "{\n" + params +
                       "  \"grid\": { \"nx\": 32, \"ny\": 64 },\n"
                       "  \"spectral\": { \"K_max\": 64, \"nu_grid\": [0.5, 1.0] },\n"
                       "  \"output\": { \"directory\": \"out\" }\n}\n",
                   "NECROSTRIP_THREADS=3 "});
  cases.push_back({"simulate", "simulate.json",
                   "{\n" + params +
                       "  \"grid\": { \"nx\": 64, \"ny\": 128 },\n"
                       "  \"spectral\": { \"K_max\": 16 },\n"
                       "  \"evolution\": { \"T\": 0.05, \"dt0\": 0.001,\n"
                       "    \"rho0\": [ { \"k\": 1, \"amplitude\": 0.001 } ] },\n"
                       "  \"output\": { \"directory\": \"out\" }\n}\n",
                   ""});
  cases.push_back({"jacobian", "jacobian.json",
                   "{\n" + params +
                       "  \"grid\": { \"nx\": 64, \"ny\": 128 },\n"
                       "  \"spectral\": { \"K_max\": 16 },\n"
                       "  \"jacobian\": { \"k_min\": 0, \"k_max\": 2, "
                       "\"epsilon\": 0.0001 },\n"
                       "  \"output\": { \"directory\": \"out\" }\n}\n",
                   ""});
  cases.push_back({"sweep", "sweep.json",
                   "{\n" + params +
                       "  \"grid\": { \"nx\": 32, \"ny\": 64 },\n"
                       "  \"spectral\": { \"K_max\": 64, \"nu_grid\": [0.5, 1.0, "
                       "2.0] },\n"
                       "  \"output\": { \"directory\": \"out\" }\n}\n",
                   "NECROSTRIP_THREADS=3 "});

  int files_compared = 0;
  for (const CliCase& c : cases) {
    const fs_std::path config = g_scratch / c.config_name;
    write_file(config, c.config_text);
    // Both runs use the identical command line; the first run's artifacts are
    // moved aside so the second regenerates into the same path.
    const fs_std::path out_run = g_scratch / (c.subcommand + "_out");
    const fs_std::path out_a = g_scratch / (c.subcommand + "_first");
    fs_std::remove_all(out_run);
    fs_std::remove_all(out_a);
    const fs_std::path log_a = g_scratch / (c.subcommand + "_first.log");
    const fs_std::path log_b = g_scratch / (c.subcommand + "_second.log");
    const int rc_a = run_cli(c.subcommand, config, out_run, log_a, c.env_prefix);
    if (rc_a == 0) fs_std::rename(out_run, out_a);
    const int rc_b = run_cli(c.subcommand, config, out_run, log_b, c.env_prefix);
    if (rc_a != 0 || rc_b != 0)
      return {false, c.subcommand + " exited nonzero (" + std::to_string(rc_a) +
                         ", " + std::to_string(rc_b) + "); see " +
                         log_a.string()};
    const auto files_a = collect_outputs(out_a);
    const auto files_b = collect_outputs(out_run);
    if (files_a.empty())
      return {false, c.subcommand + " produced no data files"};
    if (files_a.size() != files_b.size())
      return {false, c.subcommand + " runs produced different file sets"};
    for (const auto& [rel, bytes] : files_a) {
      const auto it = files_b.find(rel);
      if (it == files_b.end())
        return {false, c.subcommand + ": " + rel + " missing from second run"};
      if (it->second != bytes)
        return {false, c.subcommand + ": " + rel + " differs between runs"};
      ++files_compared;
    }
  }
  return {true, "5 subcommands x 2 runs, " + std::to_string(files_compared) +
                    " data files byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: acceptance <necrostrip-binary> <scratch-dir>\n");
    return 99;
  }
  g_binary = argv[1];
  g_scratch = argv[2];
  fs_std::remove_all(g_scratch);
  fs_std::create_directories(g_scratch);

  const TumorParams p = p0_params();
  const FlatStationary fs = flat_stationary(p);

  run_criterion(1, "flat stationary identities and closed-form residual",
                [&]() -> Outcome {
    const double lhs = std::cosh(fs.rho_s - fs.eta_s);
    const double identity_rel = std::fabs(lhs - 6.0) / 6.0;
    const StationaryResidualReport rep = verify_stationary_residual(fs, p, 2048);
    const bool pass = identity_rel <= 1e-12 && rep.max_abs <= 1e-7;
    return {pass, "cosh(rho_s-eta_s) rel err " + fmt17(identity_rel) +
                      ", residual max " + fmt17(rep.max_abs)};
  });

  run_criterion(2, "existence threshold root and dichotomy", [&]() -> Outcome {
    const double sigma_star = existence_threshold(1.0, 2.0);
    const double f_at_root = threshold_f(2.0, sigma_star);
    bool below_fails = false;
    try {
      TumorParams q = p;
      q.sigma_bar = 0.999 * sigma_star;
      flat_stationary(validate_params(q));
    } catch (const Error& e) {
      below_fails = e.kind() == ErrorKind::NoFlatStationary;
    }
    bool above_succeeds = false;
    {
      TumorParams q = p;
      q.sigma_bar = 1.001 * sigma_star;
      const FlatStationary f2 = flat_stationary(validate_params(q));
      above_succeeds = f2.eta_s > 0.0 && f2.rho_s > f2.eta_s;
    }
    const bool pass = std::fabs(f_at_root) <= 1e-12 && sigma_star > 2.0 &&
                      below_fails && above_succeeds;
    return {pass, "sigma_star " + fmt17(sigma_star) + ", |f| " +
                      fmt17(std::fabs(f_at_root)) + ", dichotomy " +
                      (below_fails && above_succeeds ? "holds" : "BROKEN")};
  });

  run_criterion(3, "spectrum identities for modes 0..64", [&]() -> Outcome {
    const double gamma = 1.0;
    double worst = 0.0;
    bool parity_ok = true;
    for (int k = 1; k <= 64; ++k) {
      const double lam = lambda_k(p, fs, k, gamma);
      const double factored =
          k3_tanh(k, fs.rho_s) * (gamma - gamma_k(p, fs, k));
      worst = std::max(worst,
                       std::fabs(lam - factored) / (1.0 + std::fabs(lam)));
      parity_ok = parity_ok && lambda_k(p, fs, -k, gamma) == lam;
    }
    const bool zero_ok = lambda_k(p, fs, 0, gamma) == p.nu;
    const bool pass = worst <= 1e-12 && zero_ok && parity_ok;
    return {pass, "max factored-identity defect " + fmt17(worst) +
                      ", lambda_0 == nu " + (zero_ok ? "exact" : "BROKEN") +
                      ", parity " + (parity_ok ? "exact" : "BROKEN")};
  });

  run_criterion(4, "dispersion tail at k = 64 and threshold certificate",
                [&]() -> Outcome {
    const double target = p.mu * (p.sigma_bar - p.sigma_tilde);
    const double dev =
        std::fabs(k3_tanh(64.0, fs.rho_s) * gamma_k(p, fs, 64) - target);
    const GammaStarResult gs = gamma_star(p, fs, 64);
    const bool tail_ok = dev <= 0.01 * target;
    const bool pass = tail_ok && gs.tail_bound_ok;
    return {pass, "tail deviation " + fmt17(dev) + " vs bound " +
                      fmt17(0.01 * target) + " (" +
                      fmt17(100.0 * dev / target) +
                      "% of mu*(sigma_bar-sigma_tilde)); certificate " +
                      (gs.tail_bound_ok ? "passes" : "FAILS") +
                      " (tail_bound " + fmt17(gs.tail_bound) + ")"};
  });

  run_criterion(5, "independent two-point BVP oracle agreement and order",
                [&]() -> Outcome {
    const double gamma = 1.0;
    double worst_rel = 0.0;
    for (int k = 0; k <= 8; ++k) {
      const double lam = lambda_k(p, fs, k, gamma);
      const double hat = bvp_oracle_lambda(p, fs, k, gamma, 4096);
      worst_rel = std::max(worst_rel, std::fabs(hat - lam) / std::fabs(lam));
    }
    double min_order = 1e9;
    for (int k : {1, 4}) {
      const double lam = lambda_k(p, fs, k, gamma);
      const double e1 =
          std::fabs(bvp_oracle_lambda(p, fs, k, gamma, 1024) - lam);
      const double e2 =
          std::fabs(bvp_oracle_lambda(p, fs, k, gamma, 2048) - lam);
      const double e3 =
          std::fabs(bvp_oracle_lambda(p, fs, k, gamma, 4096) - lam);
      min_order = std::min({min_order, std::log2(e1 / e2), std::log2(e2 / e3)});
    }
    const bool pass = worst_rel <= 1e-4 && min_order >= 1.9;
    return {pass, "max rel err " + fmt17(worst_rel) + " at n=4096, min order " +
                      fmt17(min_order)};
  });

  run_criterion(6, "discrete Jacobian matches the dispersion relation",
                [&]() -> Outcome {
    const GridConfig gc{128, 256};
    const double gamma = 1.0, eps = 1e-4;
    double worst_rel = 0.0, worst_leak = 0.0;
    for (int k = 0; k <= 8; ++k) {
      const JacobianProbe probe =
          numerical_jacobian_mode(k, eps, p, fs, gamma, gc);
      const double lam = lambda_k(p, fs, k, gamma);
      worst_rel =
          std::max(worst_rel, std::fabs(probe.lambda_hat - lam) / std::fabs(lam));
      worst_leak = std::max(worst_leak, probe.leakage);
    }
    const bool pass = worst_rel <= 1e-2 && worst_leak <= 1e-3;
    return {pass, "max rel err " + fmt17(worst_rel) + ", max leakage " +
                      fmt17(worst_leak) + " over k=0..8 at 128x256"};
  });

  run_criterion(7, "obstacle solver recovers the flat configuration",
                [&]() -> Outcome {
    double sig_err[2];
    double eta_err = 0.0, comp = 0.0, hy = 0.0;
    int idx = 0;
    for (int scale : {2, 4}) {
      const int nx = 32 * scale, ny = 64 * scale;
      const StripGrid g = build_grid(nx, ny, fs, std::vector<double>(nx, 0.0));
      const ObstacleSolution obs = solve_nutrient_obstacle(g, p, fs);
      double worst = 0.0;
      for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
          const double y = std::min(g.y_physical(i, j), fs.rho_s);
          worst = std::max(worst, std::fabs(obs.sigma_field[g.idx(i, j)] -
                                            eval_sigma_s(fs, p, y)));
        }
      sig_err[idx++] = worst;
      if (scale == 4) {
        hy = g.hs * fs.rho_s;
        comp = obs.complementarity_residual;
        for (double e : obs.eta)
          eta_err = std::max(eta_err, std::fabs(e - fs.eta_s));
      }
    }
    const double order = std::log2(sig_err[0] / sig_err[1]);
    const bool pass = eta_err <= 0.1 * hy && comp <= 1e-8 * p.sigma_bar &&
                      order >= 1.9 && sig_err[1] <= 25.0 * hy * hy;
    return {pass, "eta err " + fmt17(eta_err) + " (0.1 h = " + fmt17(0.1 * hy) +
                      "), sigma err " + fmt17(sig_err[1]) + " order " +
                      fmt17(order) + ", complementarity " + fmt17(comp)};
  });

  run_criterion(8, "inner boundary linear response at mode 1",
                [&]() -> Outcome {
    const int nx = 128, ny = 256;
    const double eps = 1e-3;
    const StripGrid g = build_grid(nx, ny, fs, cosine(nx, 1, eps));
    const ObstacleSolution obs = solve_nutrient_obstacle(g, p, fs);
    double c1 = 0.0;
    for (int i = 0; i < nx; ++i)
      c1 += (obs.eta[i] - fs.eta_s) * std::cos(g.x_nodes[i]);
    c1 *= 2.0 / nx;
    const double expect = eps * coeff_d_k(p, fs, 1);
    const double rel = std::fabs(c1 - expect) / std::fabs(expect);
    return {rel <= 0.05, "response coefficient " + fmt17(c1) + " vs " +
                             fmt17(expect) + " (rel err " + fmt17(rel) + ")"};
  });

  run_criterion(9, "stability dichotomy end-to-end at 128x256",
                [&]() -> Outcome {
    const GridConfig gc{128, 256};
    const GammaStarResult gs = gamma_star(p, fs, 64);
    const int k_hat = gs.argmax_k.front();

    const double g_stable = 2.0 * gs.value;
    const double lam_stable = lambda_k(p, fs, k_hat, g_stable);
    const Trajectory stable =
        simulate(cosine(gc.nx, k_hat, 1e-3), p, fs, g_stable, 8.0, 1e-3, gc);
    const FittedRate& fr_s = stable.fitted_rates[k_hat];
    const double rel_s = std::fabs(fr_s.rate - (-lam_stable)) / lam_stable;

    const double g_unstable = 0.5 * gs.value;
    const double lam_unstable = lambda_k(p, fs, k_hat, g_unstable);
    const Trajectory unstable = simulate(cosine(gc.nx, k_hat, 1e-3), p, fs,
                                         g_unstable, 6.0, 1e-3, gc);
    const FittedRate& fr_u = unstable.fitted_rates[k_hat];
    const double rel_u =
        std::fabs(fr_u.rate - (-lam_unstable)) / std::fabs(lam_unstable);

    const bool pass = fr_s.valid && rel_s <= 0.10 &&
                      stable.stop_reason == StopReason::ReachedT &&
                      fr_u.valid && rel_u <= 0.10 &&
                      unstable.stop_reason == StopReason::BlowupGuard;
    return {pass, "k_hat=" + std::to_string(k_hat) + "; decay " +
                      fmt17(fr_s.rate) + " vs " + fmt17(-lam_stable) +
                      " (rel " + fmt17(rel_s) + "); growth " +
                      fmt17(fr_u.rate) + " vs " + fmt17(-lam_unstable) +
                      " (rel " + fmt17(rel_u) + "), stopped by " +
                      (unstable.stop_reason == StopReason::BlowupGuard
                           ? "blowup guard"
                           : "WRONG GUARD")};
  });

  run_criterion(10, "threshold is non-increasing in the dissolution rate",
                [&]() -> Outcome {
    const auto rows = gamma_star_sensitivity(p, {0.5, 1.0, 2.0}, 64);
    bool monotone = true;
    std::string seq;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i > 0 && rows[i].second > rows[i - 1].second) monotone = false;
      seq += (i ? " >= " : "") + fmt17(rows[i].second);
    }
    return {monotone && rows.size() == 3, seq};
  });

  run_criterion(11, "CLI determinism: byte-identical artifacts",
                check_cli_determinism);

  std::printf("acceptance: %d/11 criteria passed\n", 11 - g_failures);
  return g_failures;
}
