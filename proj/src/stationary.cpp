// stationary.cpp — closed-form flat stationary solution and its verification.
#include "necrostrip/params.hpp"

#include <cmath>
#include <functional>

#include "necrostrip/errors.hpp"
#include "necrostrip/format.hpp"

namespace necrostrip {

namespace {

/** 5-point one-sided first derivative at x0, stepping into the domain. */
double deriv1_onesided(const std::function<double(double)>& f, double x0,
                       double h) {
  // coefficients (-25, 48, -36, 16, -3)/(12h) for nodes x0 + i*h, i = 0..4
  return (-25.0 * f(x0) + 48.0 * f(x0 + h) - 36.0 * f(x0 + 2 * h) +
          16.0 * f(x0 + 3 * h) - 3.0 * f(x0 + 4 * h)) /
         (12.0 * h);
}

/** 5-point central second derivative. */
double deriv2_central(const std::function<double(double)>& f, double x0,
                      double h) {
  return (-f(x0 - 2 * h) + 16.0 * f(x0 - h) - 30.0 * f(x0) +
          16.0 * f(x0 + h) - f(x0 + 2 * h)) /
         (12.0 * h * h);
}

}  // namespace

TumorParams validate_params(const TumorParams& raw) {
  if (!(raw.sigma_hat > 0.0 && raw.sigma_hat < raw.sigma_tilde &&
        raw.sigma_tilde < raw.sigma_bar))
    throw Error(ErrorKind::OrderingViolation,
                "need 0 < sigma_hat < sigma_tilde < sigma_bar, got sigma_hat=" +
                    fmt17(raw.sigma_hat) + " sigma_tilde=" +
                    fmt17(raw.sigma_tilde) + " sigma_bar=" +
                    fmt17(raw.sigma_bar));
  if (!(raw.mu > 0.0))
    throw Error(ErrorKind::NonPositiveRate, "mu must be > 0, got " + fmt17(raw.mu));
  if (!(raw.nu > 0.0))
    throw Error(ErrorKind::NonPositiveRate, "nu must be > 0, got " + fmt17(raw.nu));
  if (!(raw.gamma > 0.0))
    throw Error(ErrorKind::NonPositiveRate,
                "gamma must be > 0, got " + fmt17(raw.gamma));
  return raw;
}

TumorParams validate_params(double sigma_bar, double sigma_tilde,
                            double sigma_hat, double mu, double nu,
                            double gamma) {
  return validate_params(
      TumorParams{sigma_bar, sigma_tilde, sigma_hat, mu, nu, gamma});
}

double threshold_f(double a, double r) {
  const double s = std::sqrt(r * r - 1.0);
  return s - a * std::log(r + s);
}

double existence_threshold(double sigma_hat, double sigma_tilde) {
  if (!(sigma_hat > 0.0 && sigma_hat < sigma_tilde))
    throw Error(ErrorKind::OrderingViolation,
                "existence_threshold needs 0 < sigma_hat < sigma_tilde");
  const double a = sigma_tilde / sigma_hat;  // > 1
  // f(a, a) = sinh(t) - a*t < 0 at t = acosh(a) since tanh t < t; widen the
  // upper end until the sign changes (f -> +inf as r -> inf).
  double lo = a;
  double hi = a * std::exp(a);
  int guard = 0;
  while (threshold_f(a, hi) <= 0.0) {
    hi *= 2.0;
    if (++guard > 200)
      throw Error(ErrorKind::NoConvergence,
                  "bracketing the threshold root failed (bug)");
  }
  // bisection to relative 1e-12
  for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (threshold_f(a, mid) <= 0.0 ? lo : hi) = mid;
  }
  // Newton polish; f'(r) = (r - a)/sqrt(r^2 - 1) is safely nonzero here.
  double r = 0.5 * (lo + hi);
  for (int it = 0; it < 3; ++it) {
    const double s = std::sqrt(r * r - 1.0);
    r -= threshold_f(a, r) * s / (r - a);
  }
  return sigma_hat * r;
}

FlatStationary flat_stationary(const TumorParams& raw) {
  const TumorParams params = validate_params(raw);
  const double sigma_star =
      existence_threshold(params.sigma_hat, params.sigma_tilde);
  if (!(params.sigma_bar > sigma_star))
    throw Error(ErrorKind::NoFlatStationary,
                "sigma_bar=" + fmt17(params.sigma_bar) +
                    " <= sigma_star=" + fmt17(sigma_star) +
                    "; no flat stationary solution exists");
  const double S =
      std::sqrt(params.sigma_bar * params.sigma_bar -
                params.sigma_hat * params.sigma_hat);
  const double g = std::log((params.sigma_bar + S) / params.sigma_hat);
  FlatStationary fs;
  fs.eta_s = params.mu / params.nu * (S - params.sigma_tilde * g);
  fs.rho_s = fs.eta_s + g;
  fs.p0 = 0.5 * params.mu * params.sigma_tilde *
              (fs.eta_s * fs.eta_s - fs.rho_s * fs.rho_s) +
          (params.nu - params.mu * params.sigma_tilde) *
              (fs.eta_s - fs.rho_s) * fs.eta_s +
          params.mu * (params.sigma_bar - params.sigma_hat);
  return fs;
}

double eval_sigma_s(const FlatStationary& fs, const TumorParams& params,
                    double y) {
  if (y < 0.0 || y > fs.rho_s)
    throw Error(ErrorKind::OutOfDomain,
                "y=" + fmt17(y) + " outside [0, rho_s=" + fmt17(fs.rho_s) + "]");
  if (y <= fs.eta_s) return params.sigma_hat;
  const double gap = fs.rho_s - fs.eta_s;
  return (params.sigma_bar * std::sinh(y - fs.eta_s) +
          params.sigma_hat * std::sinh(fs.rho_s - y)) /
         std::sinh(gap);
}

double eval_p_s(const FlatStationary& fs, const TumorParams& params,
                double y) {
  if (y < 0.0 || y > fs.rho_s)
    throw Error(ErrorKind::OutOfDomain,
                "y=" + fmt17(y) + " outside [0, rho_s=" + fmt17(fs.rho_s) + "]");
  if (y < fs.eta_s)
    return 0.5 * params.nu * (y * y - fs.eta_s * fs.eta_s) + fs.p0;
  return 0.5 * params.mu * params.sigma_tilde * (y * y - fs.rho_s * fs.rho_s) +
         (params.nu - params.mu * params.sigma_tilde) * (y - fs.rho_s) *
             fs.eta_s +
         params.mu * (params.sigma_bar - eval_sigma_s(fs, params, y));
}

StationaryResidualReport verify_stationary_residual(const FlatStationary& fs,
                                                    const TumorParams& params,
                                                    int n_samples) {
  StationaryResidualReport rep;
  const double gap = fs.rho_s - fs.eta_s;
  const double h = 1e-3 * gap;

  const auto sig = [&](double y) { return eval_sigma_s(fs, params, y); };
  const auto prs = [&](double y) { return eval_p_s(fs, params, y); };

  // ---- ODE residuals, 5-point central stencils strictly inside each layer
  rep.ode_residual_sigma = 0.0;
  rep.ode_residual_p = 0.0;
  const int n = std::max(n_samples, 3);
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) / n;
    // proliferating layer: sigma'' = sigma and p'' = -mu*(sigma - tilde)
    const double yu = fs.eta_s + 2 * h + t * (gap - 4 * h);
    rep.ode_residual_sigma = std::max(
        rep.ode_residual_sigma,
        std::fabs(deriv2_central(sig, yu, h) - sig(yu)));
    rep.ode_residual_p = std::max(
        rep.ode_residual_p,
        std::fabs(deriv2_central(prs, yu, h) +
                  params.mu * (sig(yu) - params.sigma_tilde)));
    // necrotic layer: p'' = nu
    const double yl = 2 * h + t * (fs.eta_s - 4 * h);
    rep.ode_residual_p = std::max(
        rep.ode_residual_p,
        std::fabs(deriv2_central(prs, yl, h) - params.nu));
  }

  // ---- the nine side conditions of the stationary system
  const auto sig_up = [&](double y) {  // proliferating branch only
    return (params.sigma_bar * std::sinh(y - fs.eta_s) +
            params.sigma_hat * std::sinh(fs.rho_s - y)) /
           std::sinh(gap);
  };
  const auto d1_into = [&](const std::function<double(double)>& f, double x0) {
    return deriv1_onesided(f, x0, h);
  };
  const auto d1_from = [&](const std::function<double(double)>& f, double x0) {
    return -deriv1_onesided([&](double x) { return f(2 * x0 - x); }, x0, h);
  };

  rep.interface_jump_residuals = {
      {"sigma(rho_s) - sigma_bar", sig(fs.rho_s) - params.sigma_bar},
      {"sigma(eta_s+) - sigma_hat", sig_up(fs.eta_s) - params.sigma_hat},
      {"sigma'(eta_s+)", d1_into(sig_up, fs.eta_s)},
      {"sigma'(0)", d1_into(sig, 0.0)},
      {"p(rho_s)", prs(fs.rho_s)},
      {"p'(rho_s)", d1_from(prs, fs.rho_s)},
      {"[p](eta_s)",
       0.5 * params.mu * params.sigma_tilde *
               (fs.eta_s * fs.eta_s - fs.rho_s * fs.rho_s) +
           (params.nu - params.mu * params.sigma_tilde) *
               (fs.eta_s - fs.rho_s) * fs.eta_s +
           params.mu * (params.sigma_bar - sig_up(fs.eta_s)) - fs.p0},
      {"[p'](eta_s)", d1_into(prs, fs.eta_s) - d1_from(prs, fs.eta_s)},
      {"p'(0)", d1_into(prs, 0.0)},
  };

  rep.max_abs = std::max(rep.ode_residual_sigma, rep.ode_residual_p);
  for (const auto& r : rep.interface_jump_residuals)
    rep.max_abs = std::max(rep.max_abs, std::fabs(r.value));
  return rep;
}

}  // namespace necrostrip
