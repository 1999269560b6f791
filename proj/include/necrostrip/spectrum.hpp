// spectrum.hpp — closed-form linearized spectrum of the flat solution.
//
// Linearizing the moving-boundary evolution around the flat stationary
// solution diagonalizes in Fourier modes: a perturbation rho = c_k e^{ikx}
// of the top surface decays (lambda_k > 0) or grows (lambda_k < 0) at the
// closed-form rate
//
//   lambda_k(gamma) = gamma k^3 tanh(k rho_s) + A_k + B_k + C_k,
//
// where the k^3 term is the surface-tension channel and A, B, C collect the
// nutrient/pressure response.  Writing gamma_k = -(A_k+B_k+C_k) /
// (k^3 tanh(k rho_s)) makes lambda_k(gamma) = k^3 tanh(k rho_s)(gamma -
// gamma_k) hold to the last bit, because both quantities share the same
// A+B+C arithmetic.  The stability threshold is gamma_star = sup_k gamma_k,
// certified against the k -> infinity tail via the asymptote
// k^3 tanh(k rho_s) gamma_k -> mu(sigma_bar - sigma_tilde).
#pragma once

#include <cmath>
#include <vector>

#include "necrostrip/params.hpp"

namespace necrostrip {

/** Eigenvalue lambda_k(gamma); k = 0 returns nu exactly, k < 0 via parity. */
double lambda_k(const TumorParams& params, const FlatStationary& fs, int k,
                double gamma);

/** Per-mode critical adhesiveness gamma_k (k >= 1). */
double gamma_k(const TumorParams& params, const FlatStationary& fs, int k);

/** Result of the gamma_star enumeration with its tail certificate. */
struct GammaStarResult {
  double value;               ///< max of gamma_k over 1 <= k <= K_max
  std::vector<int> argmax_k;  ///< all k attaining the max within rel 1e-12
  bool tail_bound_ok;         ///< tail bound < value: no larger gamma_k beyond K_max
  double tail_bound;          ///< 2*mu*(sigma_bar-sigma_tilde)/(K_max^3 tanh(K_max rho_s))
};

/**
 * Enumerate gamma_k up to K_max (>= 8) and certify that no mode beyond
 * K_max can exceed the enumerated maximum, using twice the tail asymptote
 * as a safety envelope.
 */
GammaStarResult gamma_star(const TumorParams& params, const FlatStationary& fs,
                           int K_max);

enum class Classification { Stable, Unstable, Marginal };

/** Full spectrum report at a given adhesiveness gamma. */
struct SpectrumReport {
  std::vector<double> lambda;      ///< lambda[k] for 0 <= k <= K_max
  std::vector<double> gamma_crit;  ///< gamma_crit[k] for 1 <= k <= K_max ([0] is NaN)
  double gamma;                    ///< the gamma this report classifies
  double gamma_star;               ///< certified sup of gamma_k
  std::vector<int> argmax_k;
  bool tail_bound_ok;
  double tail_bound;
  Classification classification;
  std::vector<int> unstable_modes;  ///< k >= 1 with lambda_k(gamma) < 0
  double varpi;  ///< uniform decay margin min(nu, tanh(rho_s)(gamma-gamma_star)); 0 if not Stable
};

/**
 * Classify stability at gamma: Stable (gamma > gamma_star, every mode decays
 * at least at rate varpi), Unstable (some lambda_k < 0), or Marginal
 * (|gamma - gamma_star| <= 1e-12 * gamma_star).  Throws TailNotCertified
 * (message suggests a larger K_max) when the certificate fails.
 */
SpectrumReport classify_stability(const TumorParams& params,
                                  const FlatStationary& fs, double gamma,
                                  int K_max);

/** Sampled closed-form perturbation profiles for one mode (c_k = 1). */
struct ModeProfile {
  int k;
  std::vector<double> y_a;  ///< sample points on [eta_s, rho_s]
  std::vector<double> a;    ///< nutrient perturbation a_k(y)
  std::vector<double> y_b;  ///< sample points on [0, rho_s]
  std::vector<double> b;    ///< pressure perturbation b_k(y)
  double c_k;               ///< input normalization (1)
  double d_k;               ///< lower-interface response coefficient
  double e_k;               ///< transmission coefficient
};

/** Nutrient perturbation profile a_k(y) on [eta_s, rho_s] (c_k = 1). */
double eval_a_k(const TumorParams& params, const FlatStationary& fs, int k,
                double y);

/** Pressure perturbation b_k(y), proliferating branch (eta_s <= y <= rho_s). */
double eval_b_k_upper(const TumorParams& params, const FlatStationary& fs,
                      int k, double gamma, double y);

/** Pressure perturbation b_k(y), necrotic branch (0 <= y <= eta_s). */
double eval_b_k_lower(const TumorParams& params, const FlatStationary& fs,
                      int k, double gamma, double y);

/** Lower-interface response coefficient d_k (d_0 = 1). */
double coeff_d_k(const TumorParams& params, const FlatStationary& fs, int k);

/** Transmission coefficient e_k (k = 0 uses the k -> 0 limit). */
double coeff_e_k(const TumorParams& params, const FlatStationary& fs, int k);

/** Sample the closed-form profiles on n_samples points per interval. */
ModeProfile mode_profiles(const TumorParams& params, const FlatStationary& fs,
                          int k, double gamma, int n_samples);

/**
 * gamma_star as a function of nu with everything else fixed; recomputes the
 * flat stationary solution per nu.  The output (ordered as nu_grid) is
 * non-increasing in nu.  Propagates NoFlatStationary.
 */
std::vector<std::pair<double, double>> gamma_star_sensitivity(
    const TumorParams& params, const std::vector<double>& nu_grid, int K_max);

}  // namespace necrostrip
