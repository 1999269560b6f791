// params.hpp — model constants, flat stationary solution, existence threshold.
//
// The two-layer strip model is parameterized by three nutrient levels
// (necrosis threshold sigma_hat < apoptosis balance sigma_tilde < supply
// sigma_bar), two kinetic rates (proliferation mu, necrotic dissolution nu)
// and the surface-tension coefficient gamma.  For sigma_bar above the
// threshold sigma_star the model has a unique x-independent equilibrium
// (sigma_s, p_s, eta_s, rho_s); this module evaluates it in closed form and
// provides a residual harness that re-checks stationarity numerically.
#pragma once

#include <vector>

namespace necrostrip {

/** Model constants; see validate_params for the admissibility conditions. */
struct TumorParams {
  double sigma_bar;    ///< external nutrient supply on the top boundary
  double sigma_tilde;  ///< apoptosis/mitosis balance level
  double sigma_hat;    ///< necrosis threshold level
  double mu;           ///< proliferation rate
  double nu;           ///< necrotic dissolution rate
  double gamma;        ///< cell-to-cell adhesiveness (surface tension)
};

/** Flat stationary solution: interface heights and core pressure constant. */
struct FlatStationary {
  double eta_s;  ///< lower (necrotic) interface height
  double rho_s;  ///< upper (tumor surface) height
  double p0;     ///< pressure at the lower interface, p_s(eta_s)
};

/** One named side condition of the stationary system with its residual. */
struct NamedResidual {
  const char* name;
  double value;
};

/** Residual report for a candidate flat stationary solution. */
struct StationaryResidualReport {
  double ode_residual_sigma;                     ///< max |sigma_s'' - sigma_s| over the proliferating layer
  double ode_residual_p;                         ///< max ODE residual of p_s over both layers
  std::vector<NamedResidual> interface_jump_residuals;  ///< all side conditions
  double max_abs;                                ///< max magnitude over everything above
};

/**
 * Validate the admissibility conditions 0 < sigma_hat < sigma_tilde <
 * sigma_bar and mu, nu, gamma > 0.  Returns the validated copy; throws
 * OrderingViolation / NonPositiveRate.
 */
TumorParams validate_params(const TumorParams& raw);

/** Convenience overload taking the six constants in struct order. */
TumorParams validate_params(double sigma_bar, double sigma_tilde,
                            double sigma_hat, double mu, double nu,
                            double gamma);

/**
 * The threshold function f(a, r) = sqrt(r^2-1) - a*ln(r + sqrt(r^2-1)),
 * whose unique root r = a* > a > 1 determines the existence threshold.
 */
double threshold_f(double a, double r);

/**
 * Existence threshold sigma_star = sigma_hat * a*, where a* is the unique
 * root r > a of f(sigma_tilde/sigma_hat, r) = 0.  A flat stationary solution
 * exists iff sigma_bar > sigma_star.  Root-finding: bracket [a, a*e^a]
 * (widened by doubling if needed), bisection to relative 1e-12, then three
 * Newton polish steps.  Throws NoConvergence only on a bug (the root is
 * unique), OrderingViolation if not 0 < sigma_hat < sigma_tilde.
 */
double existence_threshold(double sigma_hat, double sigma_tilde);

/**
 * Closed-form flat stationary solution.  Throws NoFlatStationary (message
 * reports sigma_star) when sigma_bar <= sigma_star.
 */
FlatStationary flat_stationary(const TumorParams& params);

/**
 * Stationary nutrient profile sigma_s(y): the obstacle value sigma_hat on
 * the necrotic layer [0, eta_s] and the hyperbolic profile above.  Throws
 * OutOfDomain for y outside [0, rho_s].
 */
double eval_sigma_s(const FlatStationary& fs, const TumorParams& params,
                    double y);

/**
 * Stationary pressure profile p_s(y), piecewise parabolic+hyperbolic,
 * continuous with continuous derivative at eta_s, p_s(rho_s) = 0.  Throws
 * OutOfDomain for y outside [0, rho_s].
 */
double eval_p_s(const FlatStationary& fs, const TumorParams& params,
                double y);

/**
 * Re-verify stationarity of (fs, params) by 5-point finite differencing of
 * the closed-form profiles on n_samples points per layer (spacing
 * 1e-3*(rho_s-eta_s)) plus direct evaluation of all nine side conditions.
 */
StationaryResidualReport verify_stationary_residual(const FlatStationary& fs,
                                                    const TumorParams& params,
                                                    int n_samples);

}  // namespace necrostrip
