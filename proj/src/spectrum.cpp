// spectrum.cpp — dispersion relation, threshold enumeration, mode profiles.
#include "necrostrip/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "necrostrip/errors.hpp"
#include "necrostrip/format.hpp"

namespace necrostrip {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

/** log(sinh x) for x > 0 without overflow. */
double log_sinh(double x) { return x - kLn2 + std::log1p(-std::exp(-2.0 * x)); }

/** log(cosh x) for x >= 0 without overflow. */
double log_cosh(double x) { return x - kLn2 + std::log1p(std::exp(-2.0 * x)); }

/** coth x for x > 0; exact saturation to 1 at large x (expm1 -> inf). */
double coth(double x) { return 1.0 + 2.0 / std::expm1(2.0 * x); }

/** sinh(num)/sinh(den) for 0 <= num <= den, overflow-safe. */
double sinh_ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  if (den > 30.0) return std::exp(log_sinh(num) - log_sinh(den));
  return std::sinh(num) / std::sinh(den);
}

/** cosh(num)/cosh(den) for 0 <= num <= den, overflow-safe. */
double cosh_ratio(double num, double den) {
  if (den > 30.0) return std::exp(log_cosh(num) - log_cosh(den));
  return std::cosh(num) / std::cosh(den);
}

/** The non-surface-tension part A + B + C of lambda_k, shared verbatim by
 *  lambda_k and gamma_k so that the factored identity
 *  lambda_k = k^3 tanh(k rho_s)(gamma - gamma_k) holds to rounding. */
double abc_terms(const TumorParams& pr, const FlatStationary& fs, int k) {
  const double S = std::sqrt(pr.sigma_bar * pr.sigma_bar -
                             pr.sigma_hat * pr.sigma_hat);
  const double g = fs.rho_s - fs.eta_s;
  const double kk = static_cast<double>(k);
  const double q = std::sqrt(kk * kk + 1.0);
  const double A =
      pr.mu * S * (q * coth(q * g) - kk * std::tanh(kk * fs.rho_s));
  // B = (nu - mu*sigma_tilde) * q*S / (sigma_hat * sinh(kg) * sinh(qg) *
  //     [coth(kg) + tanh(k eta_s)]); evaluated in log space once the sinh
  //     product would overflow (k*g > 30 covers every overflowing case).
  const double bracket = coth(kk * g) + std::tanh(kk * fs.eta_s);
  double X;
  if (kk * g > 30.0) {
    X = q * S / pr.sigma_hat *
        std::exp(-(log_sinh(kk * g) + log_sinh(q * g))) / bracket;
  } else {
    X = q * S /
        (pr.sigma_hat * std::sinh(kk * g) * std::sinh(q * g) * bracket);
  }
  const double B = (pr.nu - pr.mu * pr.sigma_tilde) * X;
  const double C = -pr.mu * (pr.sigma_bar - pr.sigma_tilde);
  return (A + B) + C;
}

double k3_tanh(const FlatStationary& fs, int k) {
  const double kk = static_cast<double>(k);
  return kk * kk * kk * std::tanh(kk * fs.rho_s);
}

}  // namespace

double lambda_k(const TumorParams& params, const FlatStationary& fs, int k,
                double gamma) {
  if (k < 0) k = -k;  // parity: the dispersion relation depends on |k|
  if (k == 0) return params.nu;
  return gamma * k3_tanh(fs, k) + abc_terms(params, fs, k);
}

double gamma_k(const TumorParams& params, const FlatStationary& fs, int k) {
  if (k < 1)
    throw Error(ErrorKind::OutOfDomain,
                "gamma_k requires k >= 1, got " + std::to_string(k));
  return -abc_terms(params, fs, k) / k3_tanh(fs, k);
}

GammaStarResult gamma_star(const TumorParams& params, const FlatStationary& fs,
                           int K_max) {
  if (K_max < 8)
    throw Error(ErrorKind::ConfigError,
                "gamma_star requires K_max >= 8, got " + std::to_string(K_max));
  GammaStarResult res;
  res.value = -std::numeric_limits<double>::infinity();
  std::vector<double> gk(K_max + 1, 0.0);
  for (int k = 1; k <= K_max; ++k) {
    gk[k] = gamma_k(params, fs, k);
    res.value = std::max(res.value, gk[k]);
  }
  for (int k = 1; k <= K_max; ++k)
    if (std::fabs(gk[k] - res.value) <= 1e-12 * std::fabs(res.value))
      res.argmax_k.push_back(k);
  res.tail_bound = 2.0 * params.mu * (params.sigma_bar - params.sigma_tilde) /
                   k3_tanh(fs, K_max);
  res.tail_bound_ok = res.tail_bound < res.value;
  return res;
}

SpectrumReport classify_stability(const TumorParams& params,
                                  const FlatStationary& fs, double gamma,
                                  int K_max) {
  const GammaStarResult gs = gamma_star(params, fs, K_max);
  if (!gs.tail_bound_ok) {
    // suggest the smallest K with 2*mu*(sigma_bar-sigma_tilde)/K^3 < value
    const double need = std::cbrt(
        2.0 * params.mu * (params.sigma_bar - params.sigma_tilde) /
        std::max(gs.value, std::numeric_limits<double>::min()));
    const int suggested = std::max(2 * K_max, static_cast<int>(need) + 1);
    throw Error(ErrorKind::TailNotCertified,
                "tail bound " + fmt17(gs.tail_bound) +
                    " does not certify gamma_star=" + fmt17(gs.value) +
                    " at K_max=" + std::to_string(K_max) +
                    "; retry with K_max >= " + std::to_string(suggested));
  }
  SpectrumReport rep;
  rep.gamma = gamma;
  rep.gamma_star = gs.value;
  rep.argmax_k = gs.argmax_k;
  rep.tail_bound_ok = gs.tail_bound_ok;
  rep.tail_bound = gs.tail_bound;
  rep.lambda.resize(K_max + 1);
  rep.gamma_crit.assign(K_max + 1,
                        std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k <= K_max; ++k) {
    rep.lambda[k] = lambda_k(params, fs, k, gamma);
    if (k >= 1) rep.gamma_crit[k] = gamma_k(params, fs, k);
  }
  for (int k = 1; k <= K_max; ++k)
    if (rep.lambda[k] < 0.0) rep.unstable_modes.push_back(k);

  if (std::fabs(gamma - gs.value) <= 1e-12 * gs.value) {
    rep.classification = Classification::Marginal;
    rep.varpi = 0.0;
  } else if (gamma > gs.value) {
    rep.classification = Classification::Stable;
    rep.varpi =
        std::min(params.nu, std::tanh(fs.rho_s) * (gamma - gs.value));
  } else {
    rep.classification = Classification::Unstable;
    rep.varpi = 0.0;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// mode profiles (4.10)-(4.14), c_k = 1
// ---------------------------------------------------------------------------

double coeff_d_k(const TumorParams& params, const FlatStationary& fs, int k) {
  if (k < 0) k = -k;
  const double S = std::sqrt(params.sigma_bar * params.sigma_bar -
                             params.sigma_hat * params.sigma_hat);
  const double g = fs.rho_s - fs.eta_s;
  const double q = std::sqrt(static_cast<double>(k) * k + 1.0);
  if (q * g > 30.0)
    return q * S / params.sigma_hat * std::exp(-log_sinh(q * g));
  return q * S / (params.sigma_hat * std::sinh(q * g));
}

double coeff_e_k(const TumorParams& params, const FlatStationary& fs, int k) {
  if (k < 0) k = -k;
  const double g = fs.rho_s - fs.eta_s;
  const double d = coeff_d_k(params, fs, k);
  const double scale = params.mu * params.sigma_tilde - params.nu;
  if (k == 0) return scale * g * d;  // k -> 0 limit of (mu*st-nu)d/(k coth kg)
  const double kk = static_cast<double>(k);
  return scale * d / (kk * (coth(kk * g) + std::tanh(kk * fs.eta_s)));
}

double eval_a_k(const TumorParams& params, const FlatStationary& fs, int k,
                double y) {
  if (k < 0) k = -k;
  if (y < fs.eta_s || y > fs.rho_s)
    throw Error(ErrorKind::OutOfDomain,
                "a_k is defined on [eta_s, rho_s], got y=" + fmt17(y));
  const double S = std::sqrt(params.sigma_bar * params.sigma_bar -
                             params.sigma_hat * params.sigma_hat);
  const double g = fs.rho_s - fs.eta_s;
  const double q = std::sqrt(static_cast<double>(k) * k + 1.0);
  return -sinh_ratio(q * (y - fs.eta_s), q * g) * S;
}

double eval_b_k_upper(const TumorParams& params, const FlatStationary& fs,
                      int k, double gamma, double y) {
  if (k < 0) k = -k;
  if (y < fs.eta_s || y > fs.rho_s)
    throw Error(ErrorKind::OutOfDomain,
                "b_k upper branch needs y in [eta_s, rho_s], got y=" + fmt17(y));
  const double S = std::sqrt(params.sigma_bar * params.sigma_bar -
                             params.sigma_hat * params.sigma_hat);
  if (k == 0)  // (4.14), proliferating branch
    return params.mu * S *
               (sinh_ratio(y - fs.eta_s, fs.rho_s - fs.eta_s) - 1.0) +
           (params.mu * params.sigma_tilde - params.nu) * (fs.rho_s - y);
  const double kk = static_cast<double>(k);
  const double g = fs.rho_s - fs.eta_s;
  return -params.mu * eval_a_k(params, fs, k, y) +
         (gamma * kk * kk - params.mu * S) *
             cosh_ratio(kk * y, kk * fs.rho_s) +
         coeff_e_k(params, fs, k) * sinh_ratio(kk * (fs.rho_s - y), kk * g);
}

double eval_b_k_lower(const TumorParams& params, const FlatStationary& fs,
                      int k, double gamma, double y) {
  if (k < 0) k = -k;
  if (y < 0.0 || y > fs.eta_s)
    throw Error(ErrorKind::OutOfDomain,
                "b_k lower branch needs y in [0, eta_s], got y=" + fmt17(y));
  const double S = std::sqrt(params.sigma_bar * params.sigma_bar -
                             params.sigma_hat * params.sigma_hat);
  if (k == 0)  // (4.14), necrotic branch (constant)
    return -params.mu * S + (params.mu * params.sigma_tilde - params.nu) *
                                (fs.rho_s - fs.eta_s);
  const double kk = static_cast<double>(k);
  // The interior-branch denominator is cosh(k eta_s): the hyperbolic reading
  // is the one consistent with continuity at eta_s and with the independent
  // two-point-BVP reconstruction (see tests/test_bvp_oracle.cpp).
  return (gamma * kk * kk - params.mu * S) *
             cosh_ratio(kk * y, kk * fs.rho_s) +
         coeff_e_k(params, fs, k) * cosh_ratio(kk * y, kk * fs.eta_s);
}

ModeProfile mode_profiles(const TumorParams& params, const FlatStationary& fs,
                          int k, double gamma, int n_samples) {
  if (n_samples < 2)
    throw Error(ErrorKind::ConfigError, "mode_profiles needs n_samples >= 2");
  ModeProfile mp;
  mp.k = k < 0 ? -k : k;
  mp.c_k = 1.0;
  mp.d_k = coeff_d_k(params, fs, k);
  mp.e_k = coeff_e_k(params, fs, k);
  mp.y_a.resize(n_samples);
  mp.a.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const double t = static_cast<double>(i) / (n_samples - 1);
    mp.y_a[i] = fs.eta_s + t * (fs.rho_s - fs.eta_s);
    mp.a[i] = eval_a_k(params, fs, mp.k, mp.y_a[i]);
  }
  mp.y_b.resize(n_samples);
  mp.b.resize(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const double t = static_cast<double>(i) / (n_samples - 1);
    mp.y_b[i] = t * fs.rho_s;
    mp.b[i] = mp.y_b[i] < fs.eta_s
                  ? eval_b_k_lower(params, fs, mp.k, gamma, mp.y_b[i])
                  : eval_b_k_upper(params, fs, mp.k, gamma, mp.y_b[i]);
  }
  return mp;
}

std::vector<std::pair<double, double>> gamma_star_sensitivity(
    const TumorParams& params, const std::vector<double>& nu_grid,
    int K_max) {
  std::vector<std::pair<double, double>> out;
  out.reserve(nu_grid.size());
  for (const double nu : nu_grid) {
    TumorParams p = params;
    p.nu = nu;
    p = validate_params(p);  // rejects nu <= 0
    const FlatStationary fs = flat_stationary(p);
    out.emplace_back(nu, gamma_star(p, fs, K_max).value);
  }
  return out;
}

}  // namespace necrostrip
