#!/usr/bin/env python3
"""Regenerate the frozen reference constants in tests/frozen_constants.hpp.

Everything is computed with 50-digit mpmath arithmetic, independently of the
C++ library: the flat stationary state from its closed form, the existence
threshold by root-finding on f(a, r), and the dispersion relation from its
A + B + C decomposition.  Values are printed with 17 significant digits,
labelled with the constant names used in the header, so the two can be
diffed by eye.  Any drift between this output and the header is a bug in
whichever side changed.

Usage: python3 tools/oracles/closed_form_constants.py
Requires: mpmath
"""

from mpmath import mp, mpf, sqrt, log, sinh, cosh, tanh, coth, acosh, findroot

mp.dps = 50

# Default parameter point P0.
hat, til, bar, mu, nu = mpf(1), mpf(2), mpf(6), mpf(1), mpf(1)

S = sqrt(bar**2 - hat**2)
g = log(bar + S) - log(hat)          # rho_s - eta_s = acosh(bar/hat)
eta_s = (mu / nu) * (S - til * log(bar + S) + til * log(hat))
rho_s = eta_s + g


def f(a, r):
    """Threshold function whose root r = a* > a gives sigma_star = hat * a*."""
    return sqrt(r**2 - 1) - a * log(r + sqrt(r**2 - 1))


a = til / hat
r_star = findroot(lambda r: f(a, r), mpf(4.4))
sigma_star = hat * r_star
t_star = acosh(r_star)


def lam_terms(k, eta, rho, hat_, til_, bar_, mu_, nu_):
    """A, B, C pieces of the dispersion relation (k >= 1)."""
    k = mpf(k)
    gg = rho - eta
    Sl = sqrt(bar_**2 - hat_**2)
    q = sqrt(k**2 + 1)
    A = mu_ * Sl * (q * coth(q * gg) - k * tanh(k * rho))
    X = q * Sl / (hat_ * sinh(k * gg) * sinh(q * gg)
                  * (coth(k * gg) + tanh(k * eta)))
    B = (nu_ - mu_ * til_) * X
    C = -mu_ * (bar_ - til_)
    return A, B, C


def gamma_k(k, eta=eta_s, rho=rho_s, hat_=hat, til_=til, bar_=bar,
            mu_=mu, nu_=nu):
    A, B, C = lam_terms(k, eta, rho, hat_, til_, bar_, mu_, nu_)
    return -(A + B + C) / (mpf(k)**3 * tanh(mpf(k) * rho))


def lam(k, gamma, eta=eta_s, rho=rho_s):
    if k == 0:
        return nu
    A, B, C = lam_terms(k, eta, rho, hat, til, bar, mu, nu)
    return gamma * mpf(k)**3 * tanh(mpf(k) * rho) + A + B + C


gam = [None] + [gamma_k(k) for k in range(1, 65)]
gamma_star = max(gam[1:])
argmax_k = max(range(1, 65), key=lambda k: gam[k])

# Mode-1 interface response and pressure-jump coefficients.
d1 = sqrt(mpf(2)) * S / (hat * sinh(sqrt(mpf(2)) * g))
e1 = (mu * til - nu) * d1 / (coth(g) + tanh(eta_s))

p0 = ((mu / 2) * til * (eta_s**2 - rho_s**2)
      + (nu - mu * til) * (eta_s - rho_s) * eta_s + mu * (bar - hat))


def p17(name, v):
    print(f"{name:22s} {mp.nstr(v, 17, strip_zeros=False)}")


p17("kS", S)
p17("kG", g)
p17("kEtaS", eta_s)
p17("kRhoS", rho_s)
p17("kP0", p0)
p17("kSigmaStar", sigma_star)
p17("kTStar", t_star)
p17("f_at_root (check ~0)", f(a, r_star))
print()
for k in (1, 2, 3, 4, 8, 16, 64):
    p17(f"kGamma{k}", gam[k])
p17("kGammaStar", gamma_star)
print(f"{'kArgmaxK':22s} {argmax_k}")
print()
p17("lambda_0 (= nu)", lam(0, mpf(1)))
p17("kLambda1At1", lam(1, mpf(1)))
p17("kLambda2At1", lam(2, mpf(1)))
p17("kLambda3At1", lam(3, mpf(1)))
p17("kLambda8At1", lam(8, mpf(1)))
p17("kLambda1At2GStar", lam(1, 2 * gamma_star))
p17("kLambda1AtHalfGStar", lam(1, gamma_star / 2))
print()
p17("kD1", d1)
p17("kE1", e1)
p17("kTanhRhoS", tanh(rho_s))
print()

# Tail of the dispersion law at k = 64: deviation of k^3 tanh(k rho_s) gamma_k
# from mu (bar - til), its relative size, the certificate bound used by
# gamma_star, and the leading-order prediction mu S / (2k).
k = mpf(64)
dev64 = abs(k**3 * tanh(k * rho_s) * gam[64] - mu * (bar - til))
p17("kDev64", dev64)
p17("kDev64Rel", dev64 / (mu * (bar - til)))
p17("kTailBoundK64", 2 * mu * (bar - til) / (k**3 * tanh(k * rho_s)))
p17("predicted mu*S/(2k)", mu * S / (2 * k))
print()

# gamma_star as nu varies (eta_s and rho_s move with nu; the layer width g
# does not).  Expected: non-increasing in nu.
for nuv, label in ((mpf('0.5'), "kGammaStarNuHalf"),
                   (mpf(1), "kGammaStarNu1"),
                   (mpf(2), "kGammaStarNu2")):
    eta_n = (mu / nuv) * (S - til * log(bar + S) + til * log(hat))
    rho_n = eta_n + g
    vals = [gamma_k(kk, eta_n, rho_n, hat, til, bar, mu, nuv)
            for kk in range(1, 65)]
    p17(label, max(vals))
