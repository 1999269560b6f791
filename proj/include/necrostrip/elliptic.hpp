// elliptic.hpp — mapped-strip elliptic solvers.
//
// Both boundary value problems live on the reference rectangle of a
// StripGrid.  Under the graph map the Laplacian of u(x, y) becomes, with
// m = s*R'/R,
//
//   Lu = u_xx - 2m u_xs + (m^2 + 1/R^2) u_ss + (-s R''/R + 2 s R'^2/R^2) u_s
//
// (tilde fields on the rectangle).  The nutrient problem discretizes x by
// centered differences, the pressure problem by Fourier collocation; both
// use centered differences in s with a reflection ghost for the bottom
// Neumann condition and identity rows on the Dirichlet top.  Systems are
// solved by preconditioned BiCGSTAB; the preconditioner inverts the exact
// flat-configuration operator per Fourier mode (tridiagonal in s).
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "necrostrip/fft.hpp"
#include "necrostrip/grid.hpp"
#include "necrostrip/params.hpp"

namespace necrostrip {

/** Nutrient obstacle solve output. */
struct ObstacleSolution {
  std::vector<double> sigma_field;    ///< nx*ny, layout idx(i,j)
  std::vector<std::uint8_t> active_mask;  ///< true where sigma > sigma_hat + tol_act
  std::vector<double> eta;            ///< eta_s + eta(x), length nx
  double complementarity_residual = 0.0;
  int pdas_iterations = 0;
  long linear_iterations = 0;   ///< BiCGSTAB iterations summed over PDAS steps
  bool used_pgs_fallback = false;
  long pgs_sweeps = 0;
};

/** Pressure transmission solve output. */
struct PressureSolution {
  std::vector<double> p_field;   ///< nx*ny
  std::vector<double> top_flux;  ///< <grad p, (-rho_x, 1)> on the top, length nx
  double transmission_residual = 0.0;  ///< one-sided dp/ds mismatch at eta
  long linear_iterations = 0;
};

/**
 * y = (-L + c0) x on PDE rows (j = 0 .. ny-2, bottom Neumann ghost built
 * in); the top row j = ny-1 passes through as identity.  c0 = 1 gives the
 * nutrient operator.  x-derivatives by centered second-order differences.
 */
void apply_sigma_operator(const StripGrid& grid, const double* x, double* y);

/**
 * Same mapped operator with c0 = 0 (y = -L x) and Fourier-collocation
 * x-derivatives; identity on the top row.  fft must have length grid.nx.
 */
void apply_pressure_operator(const StripGrid& grid, const Fft& fft,
                             const double* x, double* y);

/**
 * Exact inverse of the flat-configuration operator, applied per Fourier
 * mode in x with a tridiagonal solve in s.  Two variants share the code:
 *
 *  - Nutrient: finite-difference x symbol 2(1-cos(k hx))/hx^2, Helmholtz
 *    shift +1, and identity rows for s-layers at or below binding_depth
 *    (the flat necrotic band, where the masked system pins sigma).
 *  - Pressure: spectral symbol k^2, no shift, no pinned band.
 *
 * Exact for rho == 0; for small rho it stays a strong preconditioner.
 */
class FlatPreconditioner {
 public:
  enum class Variant { Nutrient, Pressure };

  FlatPreconditioner(int nx, int ny, double hs, double rho_s, Variant variant,
                     int binding_depth);

  /** z = M^{-1} r; buffers are owned, not thread-shareable mid-apply. */
  void apply(const double* r, double* z);

 private:
  int nx_, ny_;
  Fft fft_;
  std::vector<double> diag_, lower_, upper_;  // per mode k: ny entries each
  std::vector<std::complex<double>> modes_, buf_;
  std::vector<std::complex<double>> work_;  // Thomas scratch
};

/** Result of a BiCGSTAB run. */
struct BicgstabResult {
  long iterations = 0;
  bool converged = false;
  double residual_norm = 0.0;  // true residual ||b - A x||_2 at exit
};

/**
 * Preconditioned BiCGSTAB for y = A x given as a callback; solution is
 * written into x (which provides the initial guess).  Stops when the
 * residual 2-norm falls below max(rtol*||b||, atol); restarts on stagnation
 * or breakdown, fails after the iteration cap.  All reductions use the
 * dispatched kernel layer, so results are bitwise reproducible for a given
 * backend.
 */
BicgstabResult bicgstab(
    const std::function<void(const double*, double*)>& apply_op,
    const std::function<void(const double*, double*)>& apply_precond,
    const std::vector<double>& b, std::vector<double>& x, double rtol,
    double atol, long max_iterations);

/**
 * Solve the nutrient obstacle problem on the mapped strip:
 *
 *   -Lap(sigma) + sigma >= 0,  sigma >= sigma_hat,  complementarity,
 *   sigma = sigma_bar on top, d(sigma)/dy = 0 on bottom.
 *
 * Primal-dual active set outer loop (warm-startable via binding_init, a
 * mask of pinned nodes; defaults to the flat necrotic band y < eta_s) with
 * BiCGSTAB inner solves; falls back to projected Gauss-Seidel if the
 * active set cycles.  Returns the field, active mask, extracted lower free
 * boundary, and the complementarity residual.
 *
 * Errors: NoConvergence (iteration caps), DegenerateActiveSet (necrotic
 * layer vanished or filled the domain), NonMonotoneColumn (from the
 * embedded extraction).
 *
 * sigma_init, when given, seeds the Krylov iterate (time steppers pass the
 * previous field); the default seed is the clamped flat profile.
 */
ObstacleSolution solve_nutrient_obstacle(
    const StripGrid& grid, const TumorParams& params, const FlatStationary& fs,
    const std::vector<std::uint8_t>* binding_init = nullptr,
    const std::vector<double>* sigma_init = nullptr);

/**
 * Locate the lower free boundary per column: take the last inactive node,
 * fit a quadratic to (sigma - sigma_hat) through the three nodes above it
 * (the detachment is quadratic since sigma'' = sigma_hat > 0 there), and
 * return the vertex of that parabola as the physical height eta_s + eta(x).
 * Requires one contiguous inactive block per column touching the bottom;
 * otherwise NonMonotoneColumn.
 */
std::vector<double> extract_free_boundary(const ObstacleSolution& obstacle,
                                          const StripGrid& grid);

/** K(rho) = -(1 + rho_x^2)^{-3/2} rho_xx with spectral derivatives. */
std::vector<double> curvature(const std::vector<double>& rho_samples);

/**
 * Solve the pressure transmission problem: -Lap(p) = F with F = mu*(sigma -
 * sigma_tilde) on active nodes and F = -nu on inactive ones (i.e. Lap p =
 * -mu(sigma - sigma_tilde) in the proliferating rim, Lap p = nu in the
 * necrotic core), p = gamma*K(rho) on top, dp/dy = 0 on bottom.  The cell
 * crossed by eta(x) receives the cell-averaged mix of the two source terms,
 * which restores second-order global accuracy.  Continuity of p and its
 * gradient across eta is implicit in the single-field discretization; the
 * reported transmission_residual measures the one-sided derivative mismatch.
 * Also returns the top flux <grad p, (-rho_x, 1)> evaluated with a
 * fourth-order one-sided s-derivative and spectral x-derivative.
 *
 * p_init, when given, seeds the Krylov iterate (previous time step's field).
 */
PressureSolution solve_pressure(const StripGrid& grid,
                                const TumorParams& params,
                                const FlatStationary& fs,
                                const ObstacleSolution& obstacle,
                                double gamma,
                                const std::vector<double>* p_init = nullptr);

}  // namespace necrostrip
