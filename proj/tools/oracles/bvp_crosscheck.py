#!/usr/bin/env python3
"""Cross-check the closed-form eigenvalues with scipy's collocation BVP solver.

This is a second, independent discretization of the same two-point boundary
value problems that src/bvp_oracle.cpp solves with banded finite differences:
for a unit cos(kx) boundary perturbation, solve the nutrient perturbation on
the proliferating layer, extract the inner-interface response d_k, solve the
piecewise pressure perturbation with its derivative jump at eta_s, and report

    lambda_k = b'(rho_s) - mu * (sigma_bar - sigma_tilde).

Agreement across (a) the closed form, (b) the C++ banded-FD oracle, and
(c) scipy's adaptive collocation rules out a shared discretization artifact.

Usage: python3 tools/oracles/bvp_crosscheck.py
Requires: numpy, scipy
"""

import numpy as np
from scipy.integrate import solve_bvp

# Default parameter point P0 (sigma_hat = 1 makes log(hat) vanish below).
hat, til, bar, mu, nu = 1.0, 2.0, 6.0, 1.0, 1.0
S = np.sqrt(bar**2 - hat**2)
g = np.log(bar + S)
eta_s = S - til * np.log(bar + S)
rho_s = eta_s + g


def lam_closed(k, gamma):
    if k == 0:
        return nu
    q = np.sqrt(k**2 + 1.0)
    A = mu * S * (q / np.tanh(q * g) - k * np.tanh(k * rho_s))
    X = q * S / (hat * np.sinh(k * g) * np.sinh(q * g)
                 * (1 / np.tanh(k * g) + np.tanh(k * eta_s)))
    B = (nu - mu * til) * X
    C = -mu * (bar - til)
    return gamma * k**3 * np.tanh(k * rho_s) + A + B + C


def lam_bvp(k, gamma):
    # Stage 1: nutrient perturbation a(y) on [eta_s, rho_s],
    #   a'' = (k^2 + 1) a,  a(eta_s) = 0,  a(rho_s) = -S,
    # and the inner-interface response d_k = -a'(eta_s) / sigma_hat.
    def fa(y, a):
        return np.vstack([a[1], (k**2 + 1.0) * a[0]])

    def bca(l, r):
        return np.array([l[0], r[0] + S])

    ya = np.linspace(eta_s, rho_s, 4001)
    sola = solve_bvp(fa, bca, ya, np.zeros((2, ya.size)),
                     tol=1e-10, max_nodes=400000)
    assert sola.success
    d_k = -sola.sol(eta_s)[1] / hat

    # Stage 2: piecewise pressure perturbation b(y) with continuity at eta_s
    # and derivative jump b_u'(eta_s) - b_l'(eta_s) = (mu (hat - til) + nu) d_k:
    #   lower [0, eta_s]:      b'' = k^2 b,           b'(0) = 0
    #   upper [eta_s, rho_s]:  b'' = k^2 b - mu a,    b(rho_s) = gamma k^2
    # Solved as one coupled system on t in [0, 1], with L(t) the lower layer
    # at y = t * eta_s and U(t) the upper layer at y = eta_s + t * (rho_s - eta_s).
    gap = rho_s - eta_s

    def fb(t, z):
        L, Lp, U, Up = z
        aval = sola.sol(eta_s + t * gap)[0]
        return np.vstack([eta_s * Lp, eta_s * (k**2) * L,
                          gap * Up, gap * ((k**2) * U - mu * aval)])

    jump = (mu * (hat - til) + nu) * d_k

    def bcb(l, r):
        return np.array([l[1],                # b'(0) = 0
                         r[0] - l[2],         # continuity at eta_s
                         l[3] - r[1] - jump,  # derivative jump at eta_s
                         r[2] - gamma * k**2])  # b(rho_s) = gamma k^2

    t = np.linspace(0, 1, 2001)
    solb = solve_bvp(fb, bcb, t, np.zeros((4, t.size)),
                     tol=1e-10, max_nodes=400000)
    assert solb.success
    bp_top = solb.sol(1.0)[3]
    return bp_top - mu * (bar - til)


if __name__ == "__main__":
    for k, gamma in [(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0), (8, 1.0),
                     (1, 3.14757888)]:
        lc, lb = lam_closed(k, gamma), lam_bvp(k, gamma)
        rel = abs(lb - lc) / max(1.0, abs(lc))
        print(f"k={k} gamma={gamma}: closed={lc:.12g} "
              f"bvp={lb:.12g} relerr={rel:.3e}")
