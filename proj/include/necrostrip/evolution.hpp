// evolution.hpp — nonlinear interface evolution d(rho)/dt = -Psi(rho).
//
// Psi composes the elliptic solvers: given rho, solve the nutrient obstacle
// problem and the pressure transmission problem on the mapped strip and
// read off the top flux <grad p, (-rho_x, 1)>.  Time stepping treats the
// stiff curvature symbol m_k = gamma*|k|^3*tanh(|k|*rho_s) implicitly per
// Fourier mode (the sole O(k^3) stiffness of the dispersion relation) and
// the bounded nutrient/necrosis remainder explicitly.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "necrostrip/params.hpp"

namespace necrostrip {

/** Grid resolution for the elliptic solves inside Psi. */
struct GridConfig {
  int nx = 128;
  int ny = 256;
};

/** Discrete Jacobian probe at a single Fourier mode. */
struct JacobianProbe {
  double lambda_hat = 0.0;  ///< measured per-mode growth factor
  double leakage = 0.0;     ///< energy in modes != k relative to mode k
};

/** Time integrator flavors for step(). */
enum class Scheme { Imex, Explicit };

/** Outcome of a single attempted step. */
struct StepResult {
  std::vector<double> rho_next;
  bool rejected = false;
  std::string reject_reason;
};

/** Per-accepted-step solver diagnostics. */
struct StepDiagnostics {
  double dt = 0.0;
  double psi_max_abs = 0.0;
  double eta_min = 0.0;
  double eta_max = 0.0;
  int pdas_iterations = 0;
  long obstacle_linear_iterations = 0;
  long pressure_linear_iterations = 0;
};

/** Why a simulation stopped. */
enum class StopReason { ReachedT, BlowupGuard, ConvergedToZero };

/** Fitted exponential rate of one Fourier mode. */
struct FittedRate {
  int k = 0;
  double rate = 0.0;
  double r_squared = 0.0;
  bool valid = false;        ///< fit succeeded
  bool below_floor = false;  ///< amplitude never rose above the 1e-14 floor
};

/** Time history of a simulation. */
struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> rho_snapshots;     ///< per time, length nx
  std::vector<std::vector<double>> mode_amplitudes;   ///< per time, 0..nx/2
  std::vector<FittedRate> fitted_rates;               ///< per mode, 0..nx/2
  std::vector<StepDiagnostics> diagnostics;           ///< aligned with times
  StopReason stop_reason = StopReason::ReachedT;
};

/**
 * Psi(rho) on the collocation nodes: build_grid -> solve_nutrient_obstacle
 * -> solve_pressure -> top flux, with p = gamma*K(rho) on the moving
 * boundary.  d(rho)/dt = -Psi(rho).  Propagates the elliptic errors.
 */
std::vector<double> evaluate_psi(const std::vector<double>& rho_samples,
                                 const TumorParams& params,
                                 const FlatStationary& fs, double gamma,
                                 const GridConfig& grid_config);

/**
 * Measure the k-th diagonal entry of the discrete Jacobian DPsi(0) with a
 * centered-at-zero probe rho = epsilon*cos(kx) (epsilon in [1e-6, 1e-3]):
 * lambda_hat is the cos(kx) coefficient of (Psi(probe) - Psi(0))/epsilon,
 * and leakage the relative energy leaked into other modes.  The closed-form
 * dispersion relation predicts lambda_hat = lambda_k(gamma).
 */
JacobianProbe numerical_jacobian_mode(int k, double epsilon,
                                      const TumorParams& params,
                                      const FlatStationary& fs, double gamma,
                                      const GridConfig& grid_config);

/**
 * One attempted time step.  Scheme::Imex applies
 *   rho_next = (I + dt*M)^{-1} (rho - dt*(Psi(rho) - M*rho)),
 * with M the Fourier multiplier m_k = gamma*|k|^3*tanh(|k|*rho_s);
 * Scheme::Explicit is plain forward Euler rho - dt*Psi(rho).
 *
 * The result is flagged rejected (caller halves dt) when the Psi evaluation
 * fails recoverably, when rho_next breaches the geometry margin, or when
 * the step changes rho by more than 10% of its amplitude (with an absolute
 * floor of 1e-4*(rho_s - eta_s) so the flat fixed point is steppable).
 */
StepResult step(const std::vector<double>& rho, double dt,
                const TumorParams& params, const FlatStationary& fs,
                double gamma, Scheme scheme, const GridConfig& grid_config);

/**
 * Adaptive-dt IMEX integration from rho0 to time T (initial step dt0,
 * growth 1.2x per acceptance up to dt_max = 0.01, halving on rejection).
 * Stops early on the blowup guard (max|rho| > 10x initial) or the
 * convergence guard (max|rho| < 1e-12 x initial); per-mode exponential
 * rates are fitted on the final 50% of samples.  Requires max|rho0| <=
 * (rho_s - eta_s)/8 (GeometryViolation otherwise).  Throws MinStepReached
 * when rejections push dt below dt0*1e-6; if partial is non-null the
 * trajectory recorded so far is stored there before throwing.
 */
Trajectory simulate(const std::vector<double>& rho0, const TumorParams& params,
                    const FlatStationary& fs, double gamma, double T,
                    double dt0, const GridConfig& grid_config,
                    Trajectory* partial = nullptr);

/**
 * Ordinary least squares of log(amplitude) vs time for mode k over the
 * final window_fraction of the trajectory.  Amplitudes are clipped at the
 * 1e-14 floor before the log.  Throws InsufficientData (< 10 samples in
 * the window) and NonPositiveAmplitude (every sample at or below the
 * floor).  Returns the slope (the fitted rate) and r^2.
 */
struct RateFit {
  double rate = 0.0;
  double r_squared = 0.0;
};
RateFit decay_rate_fit(const Trajectory& trajectory, int k,
                       double window_fraction);

}  // namespace necrostrip
