// bvp_oracle.hpp — independent finite-difference reconstruction of lambda_k.
//
// The closed-form spectrum rests on explicitly solved two-point boundary
// value problems for the per-mode perturbation profiles (a_k, b_k).  This
// oracle re-derives lambda_k without touching any of those closed forms:
// it discretizes the defining BVPs with second-order finite differences,
// solves the resulting banded systems, and evaluates the flux functional
// b_k'(rho_s) - mu*(sigma_bar - sigma_tilde).  Agreement with the spectral
// module at O(n_grid^-2) certifies both derivations.
#pragma once

#include <cstddef>
#include <vector>

#include "necrostrip/params.hpp"

namespace necrostrip {

/**
 * General banded matrix with kl sub- and ku superdiagonals, LAPACK-style
 * column-band storage with room for pivot fill.  Partial-pivoting LU.
 */
class BandedMatrix {
 public:
  BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku);

  /** Access A(i, j); j must lie within the band of i (checked). */
  double& at(std::size_t i, std::size_t j);

  /** Factor in place and solve A x = rhs; throws SingularSystem. */
  std::vector<double> solve(std::vector<double> rhs);

 private:
  std::size_t n_, kl_, ku_;
  std::vector<double> ab_;     // (2*kl + ku + 1) x n, column-major bands
  std::vector<std::size_t> ipiv_;
  bool factored_ = false;

  double& ab(std::size_t band_row, std::size_t col) {
    return ab_[band_row + col * (2 * kl_ + ku_ + 1)];
  }
  void factor();
};

/**
 * Reconstruct lambda_k(gamma) from the mode BVPs by finite differences:
 *
 *   a'' = (k^2 + 1) a on (eta_s, rho_s),  a(eta_s) = 0,
 *   a(rho_s) = -sqrt(sigma_bar^2 - sigma_hat^2);
 *   d_k = -a'(eta_s) / sigma_hat;
 *
 *   b'' - k^2 b = -mu a  (proliferating layer),  b'' - k^2 b = 0 (necrotic),
 *   b'(0) = 0,  [b] = 0 and b'(eta_s+) - b'(eta_s-) = (mu(sigma_hat -
 *   sigma_tilde) + nu) d_k at the interface,  b(rho_s) = gamma k^2;
 *
 *   lambda = b'(rho_s) - mu*(sigma_bar - sigma_tilde).
 *
 * n_grid is the node count per layer (uniform in each layer); boundary and
 * interface derivatives use one-sided second-order stencils.  Throws
 * SingularSystem if the banded solve breaks down, ConfigError for
 * n_grid < 8 or k < 0.
 */
double bvp_oracle_lambda(const TumorParams& params, const FlatStationary& fs,
                         int k, double gamma, int n_grid);

}  // namespace necrostrip
