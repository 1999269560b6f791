#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "necrostrip/elliptic.hpp"
#include "necrostrip/errors.hpp"

namespace necrostrip {

namespace {

constexpr long kBicgCap = 1200;

// Derivative at s_star of the quadratic through (s0, f0), (s0+h, f1),
// (s0+2h, f2) — used for the one-sided transmission mismatch estimate.
double quad_deriv_at(double s0, double h, double f0, double f1, double f2,
                     double s_star) {
  const double d1 = (f1 - f0) / h;          // derivative at s0 + h/2, roughly
  const double d2 = (f2 - 2.0 * f1 + f0) / (h * h);
  // f'(s) = d1 + d2*(s - (s0 + h/2)) for the interpolating parabola.
  return d1 + d2 * (s_star - (s0 + 0.5 * h));
}

}  // namespace

PressureSolution solve_pressure(const StripGrid& grid,
                                const TumorParams& params,
                                const FlatStationary& fs,
                                const ObstacleSolution& obstacle,
                                double gamma,
                                const std::vector<double>* p_init) {
  const int nx = grid.nx, ny = grid.ny;
  const std::size_t n = grid.size();
  const Fft fft(static_cast<std::size_t>(nx));

  // Right-hand side of -Lap(p) = F: proliferating nodes feed mu*(sigma -
  // sigma_tilde), necrotic ones -nu (so that Lap p = nu in the core).
  std::vector<double> rhs(n, 0.0);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny - 1; ++j) {
      const std::size_t q = grid.idx(i, j);
      rhs[q] = obstacle.active_mask[q]
                   ? params.mu * (obstacle.sigma_field[q] - params.sigma_tilde)
                   : -params.nu;
    }

  // The cell straddled by eta(x) gets the cell-averaged source: without
  // this the O(1) RHS jump lands on whole cells and degrades convergence.
  for (int i = 0; i < nx; ++i) {
    const double s_eta = obstacle.eta[i] / grid.R[i];
    const int j = static_cast<int>(std::floor(s_eta / grid.hs + 0.5));
    if (j < 1 || j > ny - 2) continue;
    const double w = (s_eta - (j - 0.5) * grid.hs) / grid.hs;
    if (w < 0.0 || w > 1.0) continue;
    const std::size_t q = grid.idx(i, j);
    rhs[q] = w * (-params.nu) +
             (1.0 - w) * params.mu * (obstacle.sigma_field[q] - params.sigma_tilde);
  }

  // Dirichlet top: p = gamma * K(rho).
  const std::vector<double> kappa = curvature(grid.rho);
  for (int i = 0; i < nx; ++i)
    rhs[grid.idx(i, ny - 1)] = gamma * kappa[i];

  PressureSolution sol;
  if (p_init != nullptr && p_init->size() == n)
    sol.p_field = *p_init;
  else
    sol.p_field.assign(n, 0.0);
  for (int i = 0; i < nx; ++i)
    sol.p_field[grid.idx(i, ny - 1)] = gamma * kappa[i];

  FlatPreconditioner precond(nx, ny, grid.hs, fs.rho_s,
                             FlatPreconditioner::Variant::Pressure, -1);
  const BicgstabResult lin = bicgstab(
      [&](const double* v, double* out) {
        apply_pressure_operator(grid, fft, v, out);
      },
      [&](const double* r, double* z) { precond.apply(r, z); }, rhs,
      sol.p_field, 1e-11, 0.0, kBicgCap);
  sol.linear_iterations = lin.iterations;
  if (!lin.converged)
    throw Error(ErrorKind::NoConvergence,
                "pressure solve stalled after " +
                    std::to_string(lin.iterations) + " iterations");
  for (int i = 0; i < nx; ++i)
    sol.p_field[grid.idx(i, ny - 1)] = gamma * kappa[i];

  // Top flux <grad p, (-rho_x, 1)> on the mapped strip:
  //   psi = -R' p_x + (1 + R'^2) p_s / R   at s = 1,
  // with a fourth-order one-sided stencil for p_s and spectral p_x.
  std::vector<double> top_row(nx);
  for (int i = 0; i < nx; ++i) top_row[i] = sol.p_field[grid.idx(i, ny - 1)];
  const std::vector<double> px_top = spectral_derivative(fft, top_row, 1);
  sol.top_flux.resize(nx);
  for (int i = 0; i < nx; ++i) {
    const double* col = sol.p_field.data() + grid.idx(i, 0);
    const int t = ny - 1;
    const double ps =
        (25.0 / 12.0 * col[t] - 4.0 * col[t - 1] + 3.0 * col[t - 2] -
         4.0 / 3.0 * col[t - 3] + 0.25 * col[t - 4]) /
        grid.hs;
    sol.top_flux[i] =
        -grid.Rp[i] * px_top[i] + (1.0 + grid.Rp[i] * grid.Rp[i]) * ps / grid.R[i];
  }

  // Transmission mismatch: extrapolate dp/ds to eta from strictly below and
  // strictly above the straddled cell; p is C^1 there, so the difference
  // measures only discretization error.  Reported in physical y units.
  double mismatch = 0.0;
  for (int i = 0; i < nx; ++i) {
    const double s_eta = obstacle.eta[i] / grid.R[i];
    const int j = static_cast<int>(std::floor(s_eta / grid.hs + 0.5));
    if (j < 3 || j + 3 > ny - 1) continue;
    const double* col = sol.p_field.data() + grid.idx(i, 0);
    const double below = quad_deriv_at((j - 3) * grid.hs, grid.hs, col[j - 3],
                                       col[j - 2], col[j - 1], s_eta);
    const double above = quad_deriv_at((j + 1) * grid.hs, grid.hs, col[j + 1],
                                       col[j + 2], col[j + 3], s_eta);
    mismatch = std::max(mismatch, std::fabs(above - below) / grid.R[i]);
  }
  sol.transmission_residual = mismatch;
  return sol;
}

}  // namespace necrostrip
