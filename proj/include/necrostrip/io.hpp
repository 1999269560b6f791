// io.hpp — declarative run configuration and deterministic output artifacts.
//
// One JSON config file drives every subcommand; the schema is strict
// (unknown keys are errors) so that a config archived next to its outputs
// replays bit-for-bit.  All data writers format floating-point values with
// 17 significant digits and embed the fully resolved config as a provenance
// block; nothing time- or host-dependent goes into data files.
#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "necrostrip/evolution.hpp"
#include "necrostrip/grid.hpp"
#include "necrostrip/params.hpp"
#include "necrostrip/spectrum.hpp"

namespace necrostrip::io {

/** One seeded Fourier mode of the initial perturbation. */
struct ModeSeed {
  int k = 0;
  double amplitude = 0.0;
  double phase = 0.0;
};

/** Fully resolved run configuration. */
struct RunConfig {
  TumorParams params;  // gamma included
  int nx = 128;
  int ny = 256;
  int k_max = 64;                 // spectral truncation / certificate bound
  std::vector<double> nu_grid;    // sweep values; empty unless configured

  bool has_evolution = false;
  double T = 0.0;
  double dt0 = 0.0;
  std::vector<ModeSeed> rho0;

  bool has_jacobian = false;
  int jac_k_min = 0;
  int jac_k_max = 8;
  double jac_epsilon = 1e-4;

  std::string output_directory = "out";
  std::vector<std::string> formats;  // informational: {"csv", "json"}

  nlohmann::json resolved;  ///< the validated tree, embedded as provenance
};

/** Canonical spelling shared by artifacts and console output. */
const char* classification_name(Classification c);

/** Read and parse a JSON file; ConfigError with context on failure. */
nlohmann::json load_json_file(const std::string& path);

/**
 * Apply one --override KEY=VALUE to the raw tree.  KEY is a dot path
 * (e.g. params.gamma or grid.nx); VALUE is parsed as JSON when possible,
 * else taken as a string.  The path's parent objects must already exist.
 */
void apply_override(nlohmann::json& root, const std::string& spec);

/**
 * Validate the raw tree against the strict schema and extract a RunConfig.
 * Required blocks: params, grid, spectral, output; optional: evolution,
 * jacobian.  Unknown keys anywhere are ConfigErrors naming the key.
 */
RunConfig parse_config(const nlohmann::json& root);

/** Initial perturbation samples from the seeded modes on an nx-grid. */
std::vector<double> build_rho0(const RunConfig& config);

/** Create parents as needed and write content (binary, no translation). */
void write_text_file(const std::string& path, const std::string& content);

// --- Artifact writers (paths are <dir>/<fixed name>) -----------------------

void write_stationary_json(const std::string& dir, const RunConfig& config,
                           const FlatStationary& fs, double sigma_star,
                           const StationaryResidualReport& report);

void write_profiles_csv(const std::string& dir, const RunConfig& config,
                        const FlatStationary& fs);

void write_spectrum_csv(const std::string& dir, const RunConfig& config,
                        const FlatStationary& fs);

void write_threshold_json(const std::string& dir, const RunConfig& config,
                          const SpectrumReport& report);

void write_trajectory_csv(const std::string& dir, const RunConfig& config,
                          const Trajectory& trajectory);

void write_rates_json(const std::string& dir, const RunConfig& config,
                      const FlatStationary& fs, const Trajectory& trajectory,
                      const std::string& termination_note);

struct JacobianRow {
  int k = 0;
  double lambda_hat = 0.0;
  double lambda_closed_form = 0.0;
  double rel_err = 0.0;
  double leakage = 0.0;
};
void write_jacobian_csv(const std::string& dir, const RunConfig& config,
                        const std::vector<JacobianRow>& rows);

void write_gamma_star_vs_nu_csv(const std::string& dir,
                                const RunConfig& config,
                                const std::vector<double>& nu_values,
                                const std::vector<double>& gamma_star_values);

/** (i, j, x, y_physical, sigma, p, active) with a grid-metadata header. */
void write_field_snapshot_csv(const std::string& dir,
                              const std::string& filename,
                              const RunConfig& config, const StripGrid& grid,
                              const std::vector<double>& sigma_field,
                              const std::vector<double>& p_field,
                              const std::vector<std::uint8_t>& active_mask);

}  // namespace necrostrip::io
