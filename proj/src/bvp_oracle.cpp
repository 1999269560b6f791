#include "necrostrip/bvp_oracle.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "necrostrip/errors.hpp"

namespace necrostrip {

// ---------------------------------------------------------------------------
// Banded LU with partial pivoting (unblocked, LAPACK dgbtrf/dgbtrs layout)
// ---------------------------------------------------------------------------

BandedMatrix::BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku)
    : n_(n),
      kl_(kl),
      ku_(ku),
      ab_((2 * kl + ku + 1) * n, 0.0),
      ipiv_(n, 0) {}

double& BandedMatrix::at(std::size_t i, std::size_t j) {
  // Entry (i, j) lives at band row kl + ku + i - j of column j.
  if (j > i + ku_ || i > j + kl_)
    throw Error(ErrorKind::OutOfDomain, "banded entry (" + std::to_string(i) +
                                            "," + std::to_string(j) +
                                            ") outside band");
  return ab(kl_ + ku_ + i - j, j);
}

void BandedMatrix::factor() {
  const std::size_t d = kl_ + ku_;  // band row of the diagonal
  for (std::size_t j = 0; j < n_; ++j) {
    const std::size_t km = std::min(kl_, n_ - 1 - j);
    // Partial pivot among rows j .. j+km of column j.
    std::size_t p = 0;
    double best = std::fabs(ab(d, j));
    for (std::size_t i = 1; i <= km; ++i) {
      const double v = std::fabs(ab(d + i, j));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    ipiv_[j] = j + p;
    if (best == 0.0)
      throw Error(ErrorKind::SingularSystem,
                  "banded LU pivot vanished at column " + std::to_string(j));
    if (p != 0) {
      // Swap matrix rows j and j+p across their shared band columns.
      const std::size_t cmax = std::min(n_ - 1, j + ku_ + kl_);
      for (std::size_t c = j; c <= cmax; ++c)
        std::swap(ab(d + j - c, c), ab(d + j + p - c, c));
    }
    const double piv = ab(d, j);
    for (std::size_t i = 1; i <= km; ++i) {
      const double m = ab(d + i, j) / piv;
      ab(d + i, j) = m;  // store the L factor
      const std::size_t cmax = std::min(n_ - 1, j + ku_ + kl_);
      for (std::size_t c = j + 1; c <= cmax; ++c)
        ab(d + j + i - c, c) -= m * ab(d + j - c, c);
    }
  }
  factored_ = true;
}

std::vector<double> BandedMatrix::solve(std::vector<double> rhs) {
  if (rhs.size() != n_)
    throw Error(ErrorKind::ConfigError, "banded solve rhs size mismatch");
  if (!factored_) factor();
  const std::size_t d = kl_ + ku_;
  // Forward: apply P and L.
  for (std::size_t j = 0; j < n_; ++j) {
    if (ipiv_[j] != j) std::swap(rhs[j], rhs[ipiv_[j]]);
    const std::size_t km = std::min(kl_, n_ - 1 - j);
    for (std::size_t i = 1; i <= km; ++i) rhs[j + i] -= ab(d + i, j) * rhs[j];
  }
  // Backward: solve U x = y.
  for (std::size_t jj = n_; jj-- > 0;) {
    rhs[jj] /= ab(d, jj);
    const std::size_t reach = std::min(kl_ + ku_, jj);
    for (std::size_t i = 1; i <= reach; ++i)
      rhs[jj - i] -= ab(d - i, jj) * rhs[jj];
  }
  return rhs;
}

// ---------------------------------------------------------------------------
// lambda_k via finite differences on the defining BVPs
// ---------------------------------------------------------------------------

double bvp_oracle_lambda(const TumorParams& params, const FlatStationary& fs,
                         int k, double gamma, int n_grid) {
  if (n_grid < 8)
    throw Error(ErrorKind::ConfigError,
                "bvp_oracle_lambda requires n_grid >= 8");
  if (k < 0)
    throw Error(ErrorKind::OutOfDomain, "bvp_oracle_lambda requires k >= 0");

  const double S = std::sqrt(params.sigma_bar * params.sigma_bar -
                             params.sigma_hat * params.sigma_hat);
  const double g = fs.rho_s - fs.eta_s;
  const double kk = static_cast<double>(k) * static_cast<double>(k);
  const std::size_t n = static_cast<std::size_t>(n_grid);

  // --- Stage 1: a'' = (k^2 + 1) a on [eta_s, rho_s], Dirichlet ends. ---
  const double hu = g / static_cast<double>(n - 1);
  std::vector<double> a(n, 0.0);
  a[0] = 0.0;
  a[n - 1] = -S;
  {
    // Thomas algorithm for the interior tridiagonal system.
    const std::size_t m = n - 2;
    std::vector<double> diag(m, -2.0 / (hu * hu) - (kk + 1.0));
    std::vector<double> off(m, 1.0 / (hu * hu));
    std::vector<double> rhs(m, 0.0);
    rhs[m - 1] -= off[m - 1] * a[n - 1];  // fold in a(rho_s); a(eta_s) = 0
    for (std::size_t i = 1; i < m; ++i) {
      const double w = off[i] / diag[i - 1];
      diag[i] -= w * off[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    a[m] = rhs[m - 1] / diag[m - 1];
    for (std::size_t i = m - 1; i-- > 0;)
      a[i + 1] = (rhs[i] - off[i] * a[i + 2]) / diag[i];
  }

  // d_k = -a'(eta_s)/sigma_hat, one-sided second order.
  const double a_prime0 = (-3.0 * a[0] + 4.0 * a[1] - a[2]) / (2.0 * hu);
  const double d_k = -a_prime0 / params.sigma_hat;

  // --- Stage 2: b on [0, rho_s] with an interface node at eta_s. ---
  // Lower layer: n nodes on [0, eta_s]; upper layer reuses the a-grid.
  const double hl = fs.eta_s / static_cast<double>(n - 1);
  const std::size_t I = n - 1;       // interface node index
  const std::size_t N = 2 * n - 1;   // total nodes, shared interface
  BandedMatrix A(N, 2, 2);
  std::vector<double> rhs(N, 0.0);

  // Bottom Neumann b'(0) = 0, one-sided second order.
  A.at(0, 0) = -3.0 / (2.0 * hl);
  A.at(0, 1) = 4.0 / (2.0 * hl);
  A.at(0, 2) = -1.0 / (2.0 * hl);

  // Necrotic interior: b'' - k^2 b = 0.
  for (std::size_t j = 1; j < I; ++j) {
    A.at(j, j - 1) = 1.0 / (hl * hl);
    A.at(j, j) = -2.0 / (hl * hl) - kk;
    A.at(j, j + 1) = 1.0 / (hl * hl);
  }

  // Interface: b'(eta_s+) - b'(eta_s-) = (mu(sigma_hat - sigma_tilde) + nu) d_k.
  A.at(I, I) = -3.0 / (2.0 * hu) - 3.0 / (2.0 * hl);
  A.at(I, I + 1) = 4.0 / (2.0 * hu);
  A.at(I, I + 2) = -1.0 / (2.0 * hu);
  A.at(I, I - 1) = 4.0 / (2.0 * hl);
  A.at(I, I - 2) = -1.0 / (2.0 * hl);
  rhs[I] =
      (params.mu * (params.sigma_hat - params.sigma_tilde) + params.nu) * d_k;

  // Proliferating interior: b'' - k^2 b = -mu a(y).
  for (std::size_t j = I + 1; j + 1 < N; ++j) {
    A.at(j, j - 1) = 1.0 / (hu * hu);
    A.at(j, j) = -2.0 / (hu * hu) - kk;
    A.at(j, j + 1) = 1.0 / (hu * hu);
    rhs[j] = -params.mu * a[j - I];
  }

  // Top Dirichlet: b(rho_s) = gamma k^2 (curvature of the cos(kx) probe).
  A.at(N - 1, N - 1) = 1.0;
  rhs[N - 1] = gamma * kk;

  const std::vector<double> b = A.solve(std::move(rhs));

  // lambda = b'(rho_s) - mu (sigma_bar - sigma_tilde), one-sided second order.
  const double b_prime_top =
      (3.0 * b[N - 1] - 4.0 * b[N - 2] + b[N - 3]) / (2.0 * hu);
  return b_prime_top - params.mu * (params.sigma_bar - params.sigma_tilde);
}

}  // namespace necrostrip
