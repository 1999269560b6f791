#include "necrostrip/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "necrostrip/errors.hpp"
#include "necrostrip/format.hpp"
#include "necrostrip/kernels.hpp"

namespace necrostrip::io {

namespace {

using nlohmann::json;

[[noreturn]] void config_fail(const std::string& message) {
  throw Error(ErrorKind::ConfigError, message);
}

const json& require_block(const json& root, const char* name) {
  if (!root.contains(name)) config_fail(std::string("missing block '") + name + "'");
  const json& block = root.at(name);
  if (!block.is_object())
    config_fail(std::string("block '") + name + "' must be an object");
  return block;
}

void reject_unknown_keys(const json& obj, const char* context,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (item.key() == a) known = true;
    if (!known)
      config_fail(std::string("unknown key '") + context + "." + item.key() +
                  "'");
  }
}

double get_number(const json& obj, const char* context, const char* key) {
  if (!obj.contains(key))
    config_fail(std::string("missing key '") + context + "." + key + "'");
  if (!obj.at(key).is_number())
    config_fail(std::string("key '") + context + "." + key +
                "' must be a number");
  return obj.at(key).get<double>();
}

int get_int(const json& obj, const char* context, const char* key) {
  if (!obj.contains(key))
    config_fail(std::string("missing key '") + context + "." + key + "'");
  if (!obj.at(key).is_number_integer())
    config_fail(std::string("key '") + context + "." + key +
                "' must be an integer");
  return obj.at(key).get<int>();
}

std::string escape_name(const std::string& dir, const char* filename) {
  return (std::filesystem::path(dir) / filename).string();
}

std::string provenance_line(const RunConfig& config) {
  return "# config: " + config.resolved.dump() + "\n";
}

void write_json_artifact(const std::string& path, json j) {
  write_text_file(path, j.dump(2) + "\n");
}

const char* stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::ReachedT:
      return "reached_T";
    case StopReason::BlowupGuard:
      return "blowup_guard";
    case StopReason::ConvergedToZero:
      return "converged_to_zero";
  }
  return "unknown";
}

}  // namespace

const char* classification_name(Classification c) {
  switch (c) {
    case Classification::Stable:
      return "Stable";
    case Classification::Unstable:
      return "Unstable";
    case Classification::Marginal:
      return "Marginal";
  }
  return "unknown";
}

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_fail("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    config_fail("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

void apply_override(json& root, const std::string& spec) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    config_fail("override '" + spec + "' is not of the form KEY=VALUE");
  const std::string key = spec.substr(0, eq);
  const std::string value = spec.substr(eq + 1);

  std::vector<std::string> segments;
  std::size_t begin = 0;
  while (begin <= key.size()) {
    const std::size_t dot = key.find('.', begin);
    const std::string seg = key.substr(
        begin, dot == std::string::npos ? std::string::npos : dot - begin);
    if (seg.empty()) config_fail("override key '" + key + "' has an empty segment");
    segments.push_back(seg);
    if (dot == std::string::npos) break;
    begin = dot + 1;
  }

  json* cursor = &root;
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    if (!cursor->is_object() || !cursor->contains(segments[i]))
      config_fail("override path '" + key + "' does not exist at segment '" +
                  segments[i] + "'");
    cursor = &cursor->at(segments[i]);
  }
  if (!cursor->is_object())
    config_fail("override path '" + key + "' does not end in an object");

  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;  // bare strings are allowed
  (*cursor)[segments.back()] = parsed;
}

RunConfig parse_config(const json& root) {
  if (!root.is_object()) config_fail("config root must be an object");
  reject_unknown_keys(root, "<root>",
                      {"params", "grid", "spectral", "evolution", "jacobian",
                       "output"});

  RunConfig cfg;

  const json& params = require_block(root, "params");
  reject_unknown_keys(params, "params",
                      {"sigma_bar", "sigma_tilde", "sigma_hat", "mu", "nu",
                       "gamma"});
  cfg.params.sigma_bar = get_number(params, "params", "sigma_bar");
  cfg.params.sigma_tilde = get_number(params, "params", "sigma_tilde");
  cfg.params.sigma_hat = get_number(params, "params", "sigma_hat");
  cfg.params.mu = get_number(params, "params", "mu");
  cfg.params.nu = get_number(params, "params", "nu");
  cfg.params.gamma = get_number(params, "params", "gamma");

  const json& grid = require_block(root, "grid");
  reject_unknown_keys(grid, "grid", {"nx", "ny"});
  cfg.nx = get_int(grid, "grid", "nx");
  cfg.ny = get_int(grid, "grid", "ny");

  const json& spectral = require_block(root, "spectral");
  reject_unknown_keys(spectral, "spectral", {"K_max", "nu_grid"});
  cfg.k_max = get_int(spectral, "spectral", "K_max");
  if (spectral.contains("nu_grid")) {
    if (!spectral.at("nu_grid").is_array())
      config_fail("key 'spectral.nu_grid' must be an array of numbers");
    for (const auto& v : spectral.at("nu_grid")) {
      if (!v.is_number())
        config_fail("key 'spectral.nu_grid' must contain only numbers");
      cfg.nu_grid.push_back(v.get<double>());
    }
  }

  if (root.contains("evolution")) {
    const json& evolution = require_block(root, "evolution");
    reject_unknown_keys(evolution, "evolution", {"T", "dt0", "rho0"});
    cfg.has_evolution = true;
    cfg.T = get_number(evolution, "evolution", "T");
    cfg.dt0 = get_number(evolution, "evolution", "dt0");
    if (!evolution.contains("rho0") || !evolution.at("rho0").is_array())
      config_fail("key 'evolution.rho0' must be an array of mode seeds");
    for (const auto& seed : evolution.at("rho0")) {
      if (!seed.is_object())
        config_fail("entries of 'evolution.rho0' must be objects");
      reject_unknown_keys(seed, "evolution.rho0[]",
                          {"k", "amplitude", "phase"});
      ModeSeed ms;
      ms.k = get_int(seed, "evolution.rho0[]", "k");
      ms.amplitude = get_number(seed, "evolution.rho0[]", "amplitude");
      ms.phase = seed.contains("phase")
                     ? get_number(seed, "evolution.rho0[]", "phase")
                     : 0.0;
      cfg.rho0.push_back(ms);
    }
  }

  if (root.contains("jacobian")) {
    const json& jacobian = require_block(root, "jacobian");
    reject_unknown_keys(jacobian, "jacobian", {"k_min", "k_max", "epsilon"});
    cfg.has_jacobian = true;
    if (jacobian.contains("k_min"))
      cfg.jac_k_min = get_int(jacobian, "jacobian", "k_min");
    if (jacobian.contains("k_max"))
      cfg.jac_k_max = get_int(jacobian, "jacobian", "k_max");
    if (jacobian.contains("epsilon"))
      cfg.jac_epsilon = get_number(jacobian, "jacobian", "epsilon");
  }

  const json& output = require_block(root, "output");
  reject_unknown_keys(output, "output", {"directory", "formats"});
  if (!output.contains("directory") || !output.at("directory").is_string())
    config_fail("key 'output.directory' must be a string");
  cfg.output_directory = output.at("directory").get<std::string>();
  if (output.contains("formats")) {
    if (!output.at("formats").is_array())
      config_fail("key 'output.formats' must be an array of strings");
    for (const auto& f : output.at("formats")) {
      if (!f.is_string())
        config_fail("key 'output.formats' must contain only strings");
      cfg.formats.push_back(f.get<std::string>());
    }
  } else {
    cfg.formats = {"csv", "json"};
  }

  // Re-serialize the resolved configuration (defaults included) so every
  // artifact can embed exactly what was run.
  json resolved;
  resolved["params"] = {{"sigma_bar", cfg.params.sigma_bar},
                        {"sigma_tilde", cfg.params.sigma_tilde},
                        {"sigma_hat", cfg.params.sigma_hat},
                        {"mu", cfg.params.mu},
                        {"nu", cfg.params.nu},
                        {"gamma", cfg.params.gamma}};
  resolved["grid"] = {{"nx", cfg.nx}, {"ny", cfg.ny}};
  resolved["spectral"] = {{"K_max", cfg.k_max}};
  if (!cfg.nu_grid.empty()) resolved["spectral"]["nu_grid"] = cfg.nu_grid;
  if (cfg.has_evolution) {
    json seeds = json::array();
    for (const ModeSeed& ms : cfg.rho0)
      seeds.push_back({{"k", ms.k},
                       {"amplitude", ms.amplitude},
                       {"phase", ms.phase}});
    resolved["evolution"] = {{"T", cfg.T}, {"dt0", cfg.dt0}, {"rho0", seeds}};
  }
  if (cfg.has_jacobian)
    resolved["jacobian"] = {{"k_min", cfg.jac_k_min},
                            {"k_max", cfg.jac_k_max},
                            {"epsilon", cfg.jac_epsilon}};
  resolved["output"] = {{"directory", cfg.output_directory},
                        {"formats", cfg.formats}};
  cfg.resolved = std::move(resolved);
  return cfg;
}

std::vector<double> build_rho0(const RunConfig& config) {
  std::vector<double> rho(static_cast<std::size_t>(config.nx), 0.0);
  const double hx = 2.0 * std::numbers::pi / config.nx;
  for (const ModeSeed& ms : config.rho0) {
    if (ms.k < 0 || ms.k > config.nx / 2)
      config_fail("rho0 mode k = " + std::to_string(ms.k) +
                  " outside [0, nx/2]");
    for (int i = 0; i < config.nx; ++i)
      rho[i] += ms.amplitude * std::cos(ms.k * hx * i + ms.phase);
  }
  return rho;
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec)
      config_fail("cannot create directory '" + p.parent_path().string() +
                  "': " + ec.message());
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) config_fail("cannot open '" + path + "' for writing");
  out << content;
  if (!out) config_fail("write to '" + path + "' failed");
}

void write_stationary_json(const std::string& dir, const RunConfig& config,
                           const FlatStationary& fs, double sigma_star,
                           const StationaryResidualReport& report) {
  json j;
  j["config"] = config.resolved;
  j["eta_s"] = fs.eta_s;
  j["rho_s"] = fs.rho_s;
  j["p0"] = fs.p0;
  j["sigma_star"] = sigma_star;
  json side = json::object();
  for (const NamedResidual& r : report.interface_jump_residuals)
    side[r.name] = r.value;
  j["residuals"] = {{"ode_residual_sigma", report.ode_residual_sigma},
                    {"ode_residual_p", report.ode_residual_p},
                    {"side_conditions", side},
                    {"max_abs", report.max_abs}};
  write_json_artifact(escape_name(dir, "stationary.json"), std::move(j));
}

void write_profiles_csv(const std::string& dir, const RunConfig& config,
                        const FlatStationary& fs) {
  std::ostringstream out;
  out << provenance_line(config);
  out << "y,sigma_s,p_s\n";
  const int n = config.ny;
  for (int j = 0; j < n; ++j) {
    const double y = fs.rho_s * static_cast<double>(j) / (n - 1);
    out << fmt17(y) << ',' << fmt17(eval_sigma_s(fs, config.params, y)) << ','
        << fmt17(eval_p_s(fs, config.params, y)) << '\n';
  }
  write_text_file(escape_name(dir, "profiles.csv"), out.str());
}

void write_spectrum_csv(const std::string& dir, const RunConfig& config,
                        const FlatStationary& fs) {
  std::ostringstream out;
  out << provenance_line(config);
  out << "k,lambda_k,gamma_k,k3_tanh_k_rho_s\n";
  for (int k = 0; k <= config.k_max; ++k) {
    const double lam = lambda_k(config.params, fs, k, config.params.gamma);
    const double gk = k >= 1 ? gamma_k(config.params, fs, k)
                             : std::numeric_limits<double>::quiet_NaN();
    const double k3t = static_cast<double>(k) * k * k *
                       std::tanh(static_cast<double>(k) * fs.rho_s);
    out << k << ',' << fmt17(lam) << ',' << fmt17(gk) << ',' << fmt17(k3t)
        << '\n';
  }
  write_text_file(escape_name(dir, "spectrum.csv"), out.str());
}

void write_threshold_json(const std::string& dir, const RunConfig& config,
                          const SpectrumReport& report) {
  json j;
  j["config"] = config.resolved;
  j["gamma"] = report.gamma;
  j["gamma_star"] = report.gamma_star;
  j["argmax_k"] = report.argmax_k;
  j["K_max"] = config.k_max;
  j["tail_bound"] = report.tail_bound;
  j["tail_bound_ok"] = report.tail_bound_ok;
  j["classification"] = classification_name(report.classification);
  j["unstable_modes"] = report.unstable_modes;
  j["varpi"] = report.varpi;
  write_json_artifact(escape_name(dir, "threshold.json"), std::move(j));
}

void write_trajectory_csv(const std::string& dir, const RunConfig& config,
                          const Trajectory& trajectory) {
  std::ostringstream out;
  out << provenance_line(config);
  const std::size_t n_modes =
      trajectory.mode_amplitudes.empty() ? 0
                                         : trajectory.mode_amplitudes[0].size();
  out << "t,max_abs_rho";
  for (std::size_t k = 0; k < n_modes; ++k) out << ",A_" << k;
  out << '\n';
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    const std::vector<double>& rho = trajectory.rho_snapshots[i];
    out << fmt17(trajectory.times[i]) << ','
        << fmt17(kern::max_abs(rho.data(), rho.size()));
    for (std::size_t k = 0; k < n_modes; ++k)
      out << ',' << fmt17(trajectory.mode_amplitudes[i][k]);
    out << '\n';
  }
  write_text_file(escape_name(dir, "trajectory.csv"), out.str());
}

void write_rates_json(const std::string& dir, const RunConfig& config,
                      const FlatStationary& fs, const Trajectory& trajectory,
                      const std::string& termination_note) {
  json j;
  j["config"] = config.resolved;
  j["stop_reason"] = stop_reason_name(trajectory.stop_reason);
  if (!termination_note.empty()) j["termination_note"] = termination_note;
  json modes = json::array();
  for (const FittedRate& fr : trajectory.fitted_rates) {
    const double lam = lambda_k(config.params, fs, fr.k, config.params.gamma);
    json m;
    m["k"] = fr.k;
    m["lambda_k"] = lam;
    m["expected_rate"] = -lam;
    m["below_floor"] = fr.below_floor;
    m["valid"] = fr.valid;
    if (fr.valid) {
      m["fitted_rate"] = fr.rate;
      m["r_squared"] = fr.r_squared;
      if (!fr.below_floor && lam != 0.0)
        m["rel_err"] = std::fabs(fr.rate - (-lam)) / std::fabs(lam);
    }
    modes.push_back(std::move(m));
  }
  j["modes"] = std::move(modes);
  write_json_artifact(escape_name(dir, "rates.json"), std::move(j));
}

void write_jacobian_csv(const std::string& dir, const RunConfig& config,
                        const std::vector<JacobianRow>& rows) {
  std::ostringstream out;
  out << provenance_line(config);
  out << "k,lambda_hat,lambda_k,rel_err,leakage\n";
  for (const JacobianRow& r : rows)
    out << r.k << ',' << fmt17(r.lambda_hat) << ','
        << fmt17(r.lambda_closed_form) << ',' << fmt17(r.rel_err) << ','
        << fmt17(r.leakage) << '\n';
  write_text_file(escape_name(dir, "jacobian.csv"), out.str());
}

void write_gamma_star_vs_nu_csv(const std::string& dir,
                                const RunConfig& config,
                                const std::vector<double>& nu_values,
                                const std::vector<double>& gamma_star_values) {
  std::ostringstream out;
  out << provenance_line(config);
  out << "nu,gamma_star\n";
  for (std::size_t i = 0; i < nu_values.size(); ++i)
    out << fmt17(nu_values[i]) << ',' << fmt17(gamma_star_values[i]) << '\n';
  write_text_file(escape_name(dir, "gamma_star_vs_nu.csv"), out.str());
}

void write_field_snapshot_csv(const std::string& dir,
                              const std::string& filename,
                              const RunConfig& config, const StripGrid& grid,
                              const std::vector<double>& sigma_field,
                              const std::vector<double>& p_field,
                              const std::vector<std::uint8_t>& active_mask) {
  std::ostringstream out;
  out << provenance_line(config);
  out << "# grid: nx=" << grid.nx << " ny=" << grid.ny
      << " eta_s=" << fmt17(grid.fs.eta_s) << " rho_s=" << fmt17(grid.fs.rho_s)
      << " p0=" << fmt17(grid.fs.p0) << '\n';
  out << "i,j,x,y_physical,sigma,p,active\n";
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      const std::size_t q = grid.idx(i, j);
      out << i << ',' << j << ',' << fmt17(grid.x_nodes[i]) << ','
          << fmt17(grid.y_physical(i, j)) << ',' << fmt17(sigma_field[q])
          << ',' << fmt17(p_field[q]) << ','
          << static_cast<int>(active_mask[q]) << '\n';
    }
  write_text_file(escape_name(dir, filename.c_str()), out.str());
}

}  // namespace necrostrip::io
