#include "necrostrip/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>
#include <string>

#include "necrostrip/errors.hpp"
#include "necrostrip/kernels.hpp"

namespace necrostrip {

namespace {

// ---------------------------------------------------------------------------
// Mapped-operator building blocks (shared by full applies and the PGS row)
// ---------------------------------------------------------------------------

// d(u)/ds at (i, j) with the bottom reflection ghost u(i,-1) = u(i,1).
inline double us_at(const StripGrid& g, const double* u, int i, int j) {
  if (j == 0) return 0.0;
  const std::size_t q = g.idx(i, j);
  return (u[q + 1] - u[q - 1]) / (2.0 * g.hs);
}

// d2(u)/ds2 at (i, j) with the same ghost.
inline double uss_at(const StripGrid& g, const double* u, int i, int j) {
  const std::size_t q = g.idx(i, j);
  if (j == 0) return 2.0 * (u[q + 1] - u[q]) / (g.hs * g.hs);
  return (u[q - 1] - 2.0 * u[q] + u[q + 1]) / (g.hs * g.hs);
}

struct MetricCoefs {
  double cxs;  // multiplies u_xs
  double css;  // multiplies u_ss
  double cs;   // multiplies u_s
};

inline MetricCoefs metric_at(const StripGrid& g, int i, int j) {
  const double s = g.y_map[j];
  const double R = g.R[i];
  const double m = s * g.Rp[i] / R;
  MetricCoefs c;
  c.cxs = -2.0 * m;
  c.css = m * m + 1.0 / (R * R);
  c.cs = -s * g.Rpp[i] / R + 2.0 * s * g.Rp[i] * g.Rp[i] / (R * R);
  return c;
}

// One finite-difference row of (-Lap + c0) u at a PDE node (j <= ny-2).
inline double fd_row(const StripGrid& g, const double* u, int i, int j,
                     double c0) {
  const int nx = g.nx;
  const int ip = (i + 1 == nx) ? 0 : i + 1;
  const int im = (i == 0) ? nx - 1 : i - 1;
  const std::size_t q = g.idx(i, j);
  const double uxx =
      (u[g.idx(im, j)] - 2.0 * u[q] + u[g.idx(ip, j)]) / (g.hx * g.hx);
  const double usx =
      (us_at(g, u, ip, j) - us_at(g, u, im, j)) / (2.0 * g.hx);
  const MetricCoefs c = metric_at(g, i, j);
  const double lap = uxx + c.cxs * usx + c.css * uss_at(g, u, i, j) +
                     c.cs * us_at(g, u, i, j);
  return c0 * u[q] - lap;
}

}  // namespace

void apply_sigma_operator(const StripGrid& grid, const double* x, double* y) {
  const int nx = grid.nx, ny = grid.ny;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny - 1; ++j) y[grid.idx(i, j)] = fd_row(grid, x, i, j, 1.0);
    y[grid.idx(i, ny - 1)] = x[grid.idx(i, ny - 1)];
  }
}

void apply_pressure_operator(const StripGrid& grid, const Fft& fft,
                             const double* x, double* y) {
  const int nx = grid.nx, ny = grid.ny;
  const std::size_t n = grid.size();

  // d(u)/ds everywhere below the top (reflection ghost at the bottom).
  std::vector<double> us(n, 0.0);
  for (int i = 0; i < nx; ++i)
    for (int j = 1; j < ny - 1; ++j)
      us[grid.idx(i, j)] = us_at(grid, x, i, j);

  // Spectral x-derivatives row by row: u_xx of the field, d/dx of u_s.
  std::vector<double> uxx(n, 0.0), usx(n, 0.0), row(nx);
  for (int j = 0; j < ny - 1; ++j) {
    for (int i = 0; i < nx; ++i) row[i] = x[grid.idx(i, j)];
    const std::vector<double> d2 = spectral_derivative(fft, row, 2);
    for (int i = 0; i < nx; ++i) uxx[grid.idx(i, j)] = d2[i];
    for (int i = 0; i < nx; ++i) row[i] = us[grid.idx(i, j)];
    const std::vector<double> d1 = spectral_derivative(fft, row, 1);
    for (int i = 0; i < nx; ++i) usx[grid.idx(i, j)] = d1[i];
  }

  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny - 1; ++j) {
      const std::size_t q = grid.idx(i, j);
      const MetricCoefs c = metric_at(grid, i, j);
      y[q] = -(uxx[q] + c.cxs * usx[q] + c.css * uss_at(grid, x, i, j) +
               c.cs * us[q]);
    }
    y[grid.idx(i, ny - 1)] = x[grid.idx(i, ny - 1)];
  }
}

// ---------------------------------------------------------------------------
// Flat-configuration preconditioner
// ---------------------------------------------------------------------------

FlatPreconditioner::FlatPreconditioner(int nx, int ny, double hs, double rho_s,
                                       Variant variant, int binding_depth)
    : nx_(nx),
      ny_(ny),
      fft_(static_cast<std::size_t>(nx)),
      diag_(static_cast<std::size_t>(nx) * ny),
      lower_(static_cast<std::size_t>(nx) * ny),
      upper_(static_cast<std::size_t>(nx) * ny),
      modes_(static_cast<std::size_t>(nx) * ny),
      buf_(static_cast<std::size_t>(nx)),
      work_(static_cast<std::size_t>(ny)) {
  const double hx = 2.0 * std::numbers::pi / nx;
  const double ih2 = 1.0 / (hs * hs * rho_s * rho_s);
  const double c0 = (variant == Variant::Nutrient) ? 1.0 : 0.0;
  for (int b = 0; b < nx; ++b) {
    double symbol;
    if (variant == Variant::Nutrient) {
      // Symbol of the centered second difference at FFT bin b.
      symbol = 2.0 * (1.0 - std::cos(b * hx)) / (hx * hx);
    } else {
      const int kb = (b <= nx / 2) ? b : b - nx;
      symbol = static_cast<double>(kb) * static_cast<double>(kb);
    }
    double* dg = diag_.data() + static_cast<std::size_t>(b) * ny;
    double* lo = lower_.data() + static_cast<std::size_t>(b) * ny;
    double* up = upper_.data() + static_cast<std::size_t>(b) * ny;
    for (int j = 0; j < ny; ++j) {
      if (j == ny - 1) {  // Dirichlet top: identity row
        dg[j] = 1.0;
        lo[j] = 0.0;
        up[j] = 0.0;
      } else if (variant == Variant::Nutrient && j <= binding_depth) {
        dg[j] = 1.0;  // pinned necrotic band of the masked flat system
        lo[j] = 0.0;
        up[j] = 0.0;
      } else if (j == 0) {  // Neumann ghost row
        dg[j] = c0 + symbol + 2.0 * ih2;
        lo[j] = 0.0;
        up[j] = -2.0 * ih2;
      } else {
        dg[j] = c0 + symbol + 2.0 * ih2;
        lo[j] = -ih2;
        up[j] = -ih2;
      }
    }
    // A pinned row's upper neighbor still couples downward; that coupling
    // involves pinned values the masked system fixes, so for the
    // preconditioner we simply drop the link to keep the factor exact for
    // the flat masked operator.
    if (variant == Variant::Nutrient && binding_depth >= 0 &&
        binding_depth + 1 < ny - 1)
      lo[binding_depth + 1] = 0.0;
  }
}

void FlatPreconditioner::apply(const double* r, double* z) {
  const int nx = nx_, ny = ny_;
  // Forward transform every s-layer.
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i)
      buf_[i] = std::complex<double>(r[static_cast<std::size_t>(i) * ny + j], 0.0);
    fft_.forward(buf_.data());
    for (int b = 0; b < nx; ++b) modes_[static_cast<std::size_t>(b) * ny + j] = buf_[b];
  }
  // Per-mode tridiagonal solve in s (Thomas; real coefficients, complex rhs).
  for (int b = 0; b < nx; ++b) {
    const double* dg = diag_.data() + static_cast<std::size_t>(b) * ny;
    const double* lo = lower_.data() + static_cast<std::size_t>(b) * ny;
    const double* up = upper_.data() + static_cast<std::size_t>(b) * ny;
    std::complex<double>* u = modes_.data() + static_cast<std::size_t>(b) * ny;
    // work_ holds the modified superdiagonal (real stored as complex).
    double cp_prev = up[0] / dg[0];
    work_[0] = cp_prev;
    u[0] /= dg[0];
    for (int j = 1; j < ny; ++j) {
      const double denom = dg[j] - lo[j] * cp_prev;
      cp_prev = up[j] / denom;
      work_[j] = cp_prev;
      u[j] = (u[j] - lo[j] * u[j - 1]) / denom;
    }
    for (int j = ny - 2; j >= 0; --j) u[j] -= work_[j].real() * u[j + 1];
  }
  // Inverse transform back to nodal values.
  for (int j = 0; j < ny; ++j) {
    for (int b = 0; b < nx; ++b) buf_[b] = modes_[static_cast<std::size_t>(b) * ny + j];
    fft_.inverse(buf_.data());
    for (int i = 0; i < nx; ++i)
      z[static_cast<std::size_t>(i) * ny + j] = buf_[i].real();
  }
}

// ---------------------------------------------------------------------------
// Preconditioned BiCGSTAB (van der Vorst, with restart on breakdown)
// ---------------------------------------------------------------------------

BicgstabResult bicgstab(
    const std::function<void(const double*, double*)>& apply_op,
    const std::function<void(const double*, double*)>& apply_precond,
    const std::vector<double>& b, std::vector<double>& x, double rtol,
    double atol, long max_iterations) {
  const std::size_t n = b.size();
  if (x.size() != n)
    throw Error(ErrorKind::ConfigError, "bicgstab x0/b size mismatch");

  std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), s(n), t(n),
      phat(n), shat(n), work(n);

  const auto true_residual = [&](std::vector<double>& out) {
    apply_op(x.data(), work.data());
    kern::combine2(out.data(), 1.0, b.data(), -1.0, work.data(), n);
    return std::sqrt(kern::dot(out.data(), out.data(), n));
  };

  const double bnorm = std::sqrt(kern::dot(b.data(), b.data(), n));
  const double tol = std::max(rtol * bnorm, atol);

  BicgstabResult result;
  double rnorm = true_residual(r);
  if (rnorm <= tol) {
    result.converged = true;
    result.residual_norm = rnorm;
    return result;
  }
  rhat = r;
  double rho_prev = 1.0, alpha = 1.0, omega = 1.0;
  int restarts = 0;
  constexpr int kMaxRestarts = 6;

  const auto restart = [&]() -> bool {
    if (++restarts > kMaxRestarts) return false;
    rnorm = true_residual(r);
    rhat = r;
    std::fill(p.begin(), p.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    rho_prev = alpha = omega = 1.0;
    return true;
  };

  while (result.iterations < max_iterations) {
    ++result.iterations;
    const double rho = kern::dot(rhat.data(), r.data(), n);
    if (std::fabs(rho) < 1e-300) {
      if (restart()) continue;
      break;
    }
    const double beta = (rho / rho_prev) * (alpha / omega);
    // p = r + beta*(p - omega*v)
    kern::combine3(p.data(), 1.0, r.data(), beta, p.data(), -beta * omega,
                   v.data(), n);
    apply_precond(p.data(), phat.data());
    apply_op(phat.data(), v.data());
    const double rhat_v = kern::dot(rhat.data(), v.data(), n);
    if (std::fabs(rhat_v) < 1e-300) {
      if (restart()) continue;
      break;
    }
    alpha = rho / rhat_v;
    kern::combine2(s.data(), 1.0, r.data(), -alpha, v.data(), n);
    double snorm = std::sqrt(kern::dot(s.data(), s.data(), n));
    if (snorm <= tol) {
      kern::axpy(alpha, phat.data(), x.data(), n);
      rnorm = true_residual(r);
      if (rnorm <= tol) break;
      if (restart()) continue;
      break;
    }
    apply_precond(s.data(), shat.data());
    apply_op(shat.data(), t.data());
    const double tt = kern::dot(t.data(), t.data(), n);
    if (tt < 1e-300) {
      if (restart()) continue;
      break;
    }
    omega = kern::dot(t.data(), s.data(), n) / tt;
    kern::axpy(alpha, phat.data(), x.data(), n);
    kern::axpy(omega, shat.data(), x.data(), n);
    kern::combine2(r.data(), 1.0, s.data(), -omega, t.data(), n);
    rnorm = std::sqrt(kern::dot(r.data(), r.data(), n));
    if (rnorm <= tol) {
      rnorm = true_residual(r);
      if (rnorm <= tol) break;
      if (restart()) continue;
      break;
    }
    if (omega == 0.0) {
      if (restart()) continue;
      break;
    }
    rho_prev = rho;
  }

  result.residual_norm = true_residual(work);
  result.converged = result.residual_norm <= tol * (1.0 + 1e-12);
  return result;
}

// ---------------------------------------------------------------------------
// Curvature
// ---------------------------------------------------------------------------

std::vector<double> curvature(const std::vector<double>& rho_samples) {
  const std::size_t nx = rho_samples.size();
  Fft fft(nx);
  const std::vector<double> rx = spectral_derivative(fft, rho_samples, 1);
  const std::vector<double> rxx = spectral_derivative(fft, rho_samples, 2);
  std::vector<double> kappa(nx);
  for (std::size_t i = 0; i < nx; ++i)
    kappa[i] = -rxx[i] / std::pow(1.0 + rx[i] * rx[i], 1.5);
  return kappa;
}

// Internal hook for obstacle.cpp / pressure.cpp (not part of the public API).
namespace detail {
double sigma_fd_row(const StripGrid& g, const double* u, int i, int j) {
  return fd_row(g, u, i, j, 1.0);
}
double sigma_fd_diag(const StripGrid& g, int i, int j) {
  const MetricCoefs c = metric_at(g, i, j);
  return 1.0 + 2.0 / (g.hx * g.hx) + 2.0 * c.css / (g.hs * g.hs);
}
}  // namespace detail

}  // namespace necrostrip
