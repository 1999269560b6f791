#include "necrostrip/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "necrostrip/elliptic.hpp"
#include "necrostrip/errors.hpp"
#include "necrostrip/fft.hpp"
#include "necrostrip/format.hpp"
#include "necrostrip/grid.hpp"
#include "necrostrip/kernels.hpp"

namespace necrostrip {

namespace {

constexpr double kDtMax = 0.01;        // accuracy cap for the explicit remainder
constexpr double kAmplitudeFloor = 1e-14;

// Warm-start carry-over between consecutive Psi evaluations of a stepper.
struct WarmState {
  std::vector<double> sigma;
  std::vector<std::uint8_t> binding;
  std::vector<double> p;
  bool has = false;
};

struct PsiEval {
  std::vector<double> psi;
  std::vector<double> eta;
  int pdas_iterations = 0;
  long obstacle_linear_iterations = 0;
  long pressure_linear_iterations = 0;
};

PsiEval eval_psi_full(const std::vector<double>& rho, const TumorParams& params,
                      const FlatStationary& fs, double gamma,
                      const GridConfig& gc, WarmState* warm) {
  if (rho.size() != static_cast<std::size_t>(gc.nx))
    throw Error(ErrorKind::ConfigError,
                "rho length " + std::to_string(rho.size()) +
                    " does not match grid nx = " + std::to_string(gc.nx));
  const StripGrid grid = build_grid(gc.nx, gc.ny, fs, rho);
  const bool use_warm = warm != nullptr && warm->has;
  const ObstacleSolution obstacle = solve_nutrient_obstacle(
      grid, params, fs, use_warm ? &warm->binding : nullptr,
      use_warm ? &warm->sigma : nullptr);
  const PressureSolution pressure = solve_pressure(
      grid, params, fs, obstacle, gamma, use_warm ? &warm->p : nullptr);

  if (warm != nullptr) {
    warm->sigma = obstacle.sigma_field;
    warm->binding.assign(grid.size(), 0);
    for (std::size_t q = 0; q < grid.size(); ++q)
      warm->binding[q] = obstacle.active_mask[q] ? 0 : 1;
    for (int i = 0; i < gc.nx; ++i)
      warm->binding[grid.idx(i, gc.ny - 1)] = 0;
    warm->p = pressure.p_field;
    warm->has = true;
  }

  PsiEval out;
  out.psi = pressure.top_flux;
  out.eta = obstacle.eta;
  out.pdas_iterations = obstacle.pdas_iterations;
  out.obstacle_linear_iterations = obstacle.linear_iterations;
  out.pressure_linear_iterations = pressure.linear_iterations;
  return out;
}

// IMEX or explicit update from (rho, psi).  Fourier multiplier
// m_k = gamma*|k|^3*tanh(|k|*rho_s) handles the curvature stiffness.
std::vector<double> apply_update(const std::vector<double>& rho,
                                 const std::vector<double>& psi, double dt,
                                 double gamma, double rho_s, Scheme scheme) {
  const std::size_t nx = rho.size();
  if (scheme == Scheme::Explicit) {
    std::vector<double> next(nx);
    kern::combine2(next.data(), 1.0, rho.data(), -dt, psi.data(), nx);
    return next;
  }
  Fft fft(nx);
  std::vector<std::complex<double>> rho_hat(nx), psi_hat(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    rho_hat[i] = std::complex<double>(rho[i], 0.0);
    psi_hat[i] = std::complex<double>(psi[i], 0.0);
  }
  fft.forward(rho_hat.data());
  fft.forward(psi_hat.data());
  const std::size_t half = nx / 2;
  for (std::size_t b = 0; b < nx; ++b) {
    const double k = static_cast<double>(b <= half ? b : nx - b);
    const double m = gamma * k * k * k * std::tanh(k * rho_s);
    // (I + dt*M)^{-1} (rho - dt*(psi - M*rho)) per mode.
    rho_hat[b] = (rho_hat[b] - dt * psi_hat[b] + dt * m * rho_hat[b]) /
                 (1.0 + dt * m);
  }
  fft.inverse(rho_hat.data());
  std::vector<double> next(nx);
  for (std::size_t i = 0; i < nx; ++i) next[i] = rho_hat[i].real();
  return next;
}

// Controller acceptance test; returns a human-readable reason on rejection.
std::string acceptance_failure(const std::vector<double>& rho,
                               const std::vector<double>& next,
                               const FlatStationary& fs) {
  const double gap = fs.rho_s - fs.eta_s;
  const double margin = gap / 4.0;
  double next_min = next[0];
  for (double v : next) next_min = std::min(next_min, v);
  if (!(next_min > -margin))
    return "geometry margin breached: min(rho) = " + fmt17(next_min);
  double change = 0.0, amp = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    change = std::max(change, std::fabs(next[i] - rho[i]));
    amp = std::max(amp, std::fabs(rho[i]));
  }
  const double allowed = std::max(0.1 * amp, 1e-4 * gap);
  if (change > allowed)
    return "relative change " + fmt17(change) + " exceeds allowance " +
           fmt17(allowed);
  return {};
}

StepResult attempt_step(const std::vector<double>& rho, double dt,
                        const TumorParams& params, const FlatStationary& fs,
                        double gamma, Scheme scheme, const GridConfig& gc,
                        WarmState* warm, PsiEval* eval_out) {
  StepResult result;
  PsiEval eval;
  try {
    eval = eval_psi_full(rho, params, fs, gamma, gc, warm);
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::GeometryViolation:
      case ErrorKind::DegenerateActiveSet:
      case ErrorKind::NonMonotoneColumn:
      case ErrorKind::NoConvergence:
        result.rejected = true;
        result.reject_reason = e.what();
        return result;
      default:
        throw;  // configuration/programming errors are not step failures
    }
  }
  result.rho_next = apply_update(rho, eval.psi, dt, gamma, fs.rho_s, scheme);
  const std::string reason = acceptance_failure(rho, result.rho_next, fs);
  if (!reason.empty()) {
    result.rejected = true;
    result.reject_reason = reason;
    result.rho_next.clear();
    return result;
  }
  if (eval_out != nullptr) *eval_out = std::move(eval);
  return result;
}

}  // namespace

std::vector<double> evaluate_psi(const std::vector<double>& rho_samples,
                                 const TumorParams& params,
                                 const FlatStationary& fs, double gamma,
                                 const GridConfig& grid_config) {
  return eval_psi_full(rho_samples, params, fs, gamma, grid_config, nullptr)
      .psi;
}

JacobianProbe numerical_jacobian_mode(int k, double epsilon,
                                      const TumorParams& params,
                                      const FlatStationary& fs, double gamma,
                                      const GridConfig& grid_config) {
  if (!(epsilon >= 1e-6 && epsilon <= 1e-3))
    throw Error(ErrorKind::OutOfDomain,
                "jacobian probe epsilon must lie in [1e-6, 1e-3], got " +
                    fmt17(epsilon));
  if (k < 0 || k > grid_config.nx / 2)
    throw Error(ErrorKind::OutOfDomain,
                "jacobian probe mode k must lie in [0, nx/2], got " +
                    std::to_string(k));

  const std::size_t nx = static_cast<std::size_t>(grid_config.nx);
  const double hx = 2.0 * std::numbers::pi / static_cast<double>(nx);
  std::vector<double> flat(nx, 0.0), probe(nx);
  for (std::size_t i = 0; i < nx; ++i)
    probe[i] = epsilon * std::cos(k * hx * static_cast<double>(i));

  const std::vector<double> psi0 =
      evaluate_psi(flat, params, fs, gamma, grid_config);
  const std::vector<double> psik =
      evaluate_psi(probe, params, fs, gamma, grid_config);
  std::vector<double> dpsi(nx);
  for (std::size_t i = 0; i < nx; ++i) dpsi[i] = (psik[i] - psi0[i]) / epsilon;

  Fft fft(nx);
  const std::vector<std::complex<double>> coeffs = mode_coefficients(fft, dpsi);
  const std::vector<double> amps = mode_amplitudes(fft, dpsi);

  JacobianProbe out;
  out.lambda_hat =
      (k == 0 || k == grid_config.nx / 2) ? coeffs[k].real()
                                          : 2.0 * coeffs[k].real();
  double other = 0.0;
  for (std::size_t j = 0; j < amps.size(); ++j)
    if (static_cast<int>(j) != k) other += amps[j] * amps[j];
  const double own = amps[k] * amps[k];
  out.leakage = own > 0.0 ? other / own
                          : std::numeric_limits<double>::infinity();
  return out;
}

StepResult step(const std::vector<double>& rho, double dt,
                const TumorParams& params, const FlatStationary& fs,
                double gamma, Scheme scheme, const GridConfig& grid_config) {
  if (!(dt > 0.0))
    throw Error(ErrorKind::ConfigError, "step requires dt > 0");
  return attempt_step(rho, dt, params, fs, gamma, scheme, grid_config, nullptr,
                      nullptr);
}

Trajectory simulate(const std::vector<double>& rho0, const TumorParams& params,
                    const FlatStationary& fs, double gamma, double T,
                    double dt0, const GridConfig& grid_config,
                    Trajectory* partial) {
  if (!(T > 0.0) || !(dt0 > 0.0))
    throw Error(ErrorKind::ConfigError, "simulate requires T > 0 and dt0 > 0");
  const double gap = fs.rho_s - fs.eta_s;
  double rho0_max = kern::max_abs(rho0.data(), rho0.size());
  if (rho0_max > gap / 8.0)
    throw Error(ErrorKind::GeometryViolation,
                "max|rho0| = " + fmt17(rho0_max) +
                    " exceeds the smallness bound (rho_s - eta_s)/8 = " +
                    fmt17(gap / 8.0));

  const std::size_t nx = static_cast<std::size_t>(grid_config.nx);
  if (rho0.size() != nx)
    throw Error(ErrorKind::ConfigError, "rho0 length does not match grid nx");
  Fft fft(nx);

  Trajectory traj;
  const auto record = [&](double t, const std::vector<double>& rho,
                          const StepDiagnostics& diag) {
    traj.times.push_back(t);
    traj.rho_snapshots.push_back(rho);
    traj.mode_amplitudes.push_back(mode_amplitudes(fft, rho));
    traj.diagnostics.push_back(diag);
  };
  record(0.0, rho0, StepDiagnostics{});

  WarmState warm;
  std::vector<double> rho = rho0;
  double t = 0.0, dt = std::min(dt0, kDtMax);
  const double dt_floor = dt0 * 1e-6;
  traj.stop_reason = StopReason::ReachedT;

  while (T - t > 1e-12 * T) {
    dt = std::min(dt, T - t);
    PsiEval eval;
    StepResult attempt = attempt_step(rho, dt, params, fs, gamma,
                                      Scheme::Imex, grid_config, &warm, &eval);
    if (attempt.rejected) {
      // The warm fields still describe the current rho, so keep them.
      dt *= 0.5;
      if (dt < dt_floor) {
        if (partial != nullptr) *partial = traj;
        throw Error(ErrorKind::MinStepReached,
                    "dt = " + fmt17(dt) + " fell below dt0*1e-6 after " +
                        std::to_string(traj.times.size() - 1) +
                        " accepted steps: " + attempt.reject_reason);
      }
      continue;
    }

    t += dt;
    rho = std::move(attempt.rho_next);

    StepDiagnostics diag;
    diag.dt = dt;
    diag.psi_max_abs = kern::max_abs(eval.psi.data(), eval.psi.size());
    diag.eta_min = *std::min_element(eval.eta.begin(), eval.eta.end());
    diag.eta_max = *std::max_element(eval.eta.begin(), eval.eta.end());
    diag.pdas_iterations = eval.pdas_iterations;
    diag.obstacle_linear_iterations = eval.obstacle_linear_iterations;
    diag.pressure_linear_iterations = eval.pressure_linear_iterations;
    record(t, rho, diag);

    const double amp = kern::max_abs(rho.data(), rho.size());
    if (rho0_max > 0.0 && amp > 10.0 * rho0_max) {
      traj.stop_reason = StopReason::BlowupGuard;
      break;
    }
    if (rho0_max > 0.0 && amp < 1e-12 * rho0_max) {
      traj.stop_reason = StopReason::ConvergedToZero;
      break;
    }
    dt = std::min(dt * 1.2, kDtMax);
  }

  // Per-mode exponential rates over the final half of the recording.
  traj.fitted_rates.resize(nx / 2 + 1);
  for (std::size_t k = 0; k <= nx / 2; ++k) {
    FittedRate fr;
    fr.k = static_cast<int>(k);
    bool above_floor = false;
    for (const auto& amps : traj.mode_amplitudes)
      if (amps[k] > kAmplitudeFloor) above_floor = true;
    fr.below_floor = !above_floor;
    try {
      const RateFit fit = decay_rate_fit(traj, static_cast<int>(k), 0.5);
      fr.rate = fit.rate;
      fr.r_squared = fit.r_squared;
      fr.valid = true;
    } catch (const Error&) {
      fr.valid = false;
    }
    traj.fitted_rates[k] = fr;
  }
  if (partial != nullptr) *partial = traj;
  return traj;
}

RateFit decay_rate_fit(const Trajectory& trajectory, int k,
                       double window_fraction) {
  if (trajectory.times.empty() || trajectory.mode_amplitudes.empty())
    throw Error(ErrorKind::InsufficientData, "empty trajectory");
  if (k < 0 || static_cast<std::size_t>(k) >= trajectory.mode_amplitudes[0].size())
    throw Error(ErrorKind::OutOfDomain,
                "mode index " + std::to_string(k) + " outside amplitude table");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw Error(ErrorKind::ConfigError,
                "window_fraction must lie in (0, 1]");

  const std::size_t n = trajectory.times.size();
  const std::size_t start = static_cast<std::size_t>(
      std::ceil((1.0 - window_fraction) * static_cast<double>(n)));
  const std::size_t m = n - start;
  if (m < 10)
    throw Error(ErrorKind::InsufficientData,
                "rate window holds " + std::to_string(m) +
                    " samples; need at least 10");

  bool any_above = false;
  for (std::size_t i = start; i < n; ++i)
    if (trajectory.mode_amplitudes[i][k] > kAmplitudeFloor) any_above = true;
  if (!any_above)
    throw Error(ErrorKind::NonPositiveAmplitude,
                "mode " + std::to_string(k) +
                    " never rises above the amplitude floor in the window");

  // OLS of y = log(max(A, floor)) against t.
  double st = 0.0, sy = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    st += trajectory.times[i];
    sy += std::log(std::max(trajectory.mode_amplitudes[i][k], kAmplitudeFloor));
  }
  const double tbar = st / static_cast<double>(m);
  const double ybar = sy / static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    const double dt = trajectory.times[i] - tbar;
    const double dy =
        std::log(std::max(trajectory.mode_amplitudes[i][k], kAmplitudeFloor)) -
        ybar;
    sxx += dt * dt;
    sxy += dt * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0)
    throw Error(ErrorKind::InsufficientData,
                "rate window has no time spread");
  RateFit fit;
  fit.rate = sxy / sxx;
  const double ss_res = syy - sxy * sxy / sxx;
  fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 0.0;
  return fit;
}

}  // namespace necrostrip
