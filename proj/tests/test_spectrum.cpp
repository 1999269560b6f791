#include "doctest.h"

#include <cmath>
#include <vector>

#include "frozen_constants.hpp"
#include "necrostrip/errors.hpp"
#include "necrostrip/params.hpp"
#include "necrostrip/spectrum.hpp"

using namespace necrostrip;

namespace {

TumorParams p0_params(double gamma = 1.0) {
  TumorParams p;
  p.sigma_bar = 6.0;
  p.sigma_tilde = 2.0;
  p.sigma_hat = 1.0;
  p.mu = 1.0;
  p.nu = 1.0;
  p.gamma = gamma;
  return p;
}

double rel_err(double got, double want) {
  return std::fabs(got - want) / std::fabs(want);
}

}  // namespace

TEST_CASE("eigenvalues match the frozen high-precision spectrum") {
  const TumorParams p = p0_params();
  const FlatStationary fs = flat_stationary(p);

  CHECK(lambda_k(p, fs, 0, 1.0) == 1.0);  // lambda_0 = nu exactly
  CHECK(rel_err(lambda_k(p, fs, 1, 1.0), frozen::kLambda1At1) <= 1e-12);
  CHECK(rel_err(lambda_k(p, fs, 2, 1.0), frozen::kLambda2At1) <= 1e-12);
  CHECK(rel_err(lambda_k(p, fs, 3, 1.0), frozen::kLambda3At1) <= 1e-12);
  CHECK(rel_err(lambda_k(p, fs, 8, 1.0), frozen::kLambda8At1) <= 1e-12);
  CHECK(rel_err(lambda_k(p, fs, 1, 2.0 * frozen::kGammaStar),
                frozen::kLambda1At2GStar) <= 1e-12);
  CHECK(rel_err(lambda_k(p, fs, 1, 0.5 * frozen::kGammaStar),
                frozen::kLambda1AtHalfGStar) <= 1e-12);
}

TEST_CASE("critical surface-tension values match the frozen table") {
  const TumorParams p = p0_params();
  const FlatStationary fs = flat_stationary(p);
  CHECK(rel_err(gamma_k(p, fs, 1), frozen::kGamma1) <= 1e-12);
  CHECK(rel_err(gamma_k(p, fs, 2), frozen::kGamma2) <= 1e-12);
  CHECK(rel_err(gamma_k(p, fs, 3), frozen::kGamma3) <= 1e-12);
  CHECK(rel_err(gamma_k(p, fs, 4), frozen::kGamma4) <= 1e-12);
  CHECK(rel_err(gamma_k(p, fs, 8), frozen::kGamma8) <= 1e-12);
  CHECK(rel_err(gamma_k(p, fs, 16), frozen::kGamma16) <= 1e-12);
  CHECK(rel_err(gamma_k(p, fs, 64), frozen::kGamma64) <= 1e-11);
}

TEST_CASE("factored dispersion identity holds to rounding for k = 1..64") {
  const TumorParams p = p0_params();
  const FlatStationary fs = flat_stationary(p);
  for (double gamma : {0.3, 1.0, 2.0 * frozen::kGammaStar}) {
    for (int k = 1; k <= 64; ++k) {
      const double lam = lambda_k(p, fs, k, gamma);
      const double gk = gamma_k(p, fs, k);
      const double factored =
          double(k) * k * k * std::tanh(k * fs.rho_s) * (gamma - gk);
      CAPTURE(k);
      CAPTURE(gamma);
      CHECK(std::fabs(lam - factored) <= 1e-12 * (1.0 + std::fabs(lam)));
    }
  }
}

TEST_CASE("spectrum is even in k and affine in gamma") {
  const TumorParams p = p0_params();
  const FlatStationary fs = flat_stationary(p);
  for (int k : {1, 2, 5, 17}) {
    CHECK(lambda_k(p, fs, k, 1.3) == lambda_k(p, fs, -k, 1.3));
    // affine in gamma with slope k^3 tanh(k rho_s)
    const double l1 = lambda_k(p, fs, k, 1.0);
    const double l2 = lambda_k(p, fs, k, 2.0);
    const double slope = double(k) * k * k * std::tanh(k * fs.rho_s);
    CHECK(rel_err(l2 - l1, slope) <= 1e-12);
  }
  // surface tension stabilizes high modes fast
  CHECK(lambda_k(p, fs, 64, 1.0) > 10.0 * lambda_k(p, fs, 8, 1.0));
}

TEST_CASE("gamma_star: value, argmax, and tail certificate at K_max = 64") {
  const TumorParams p = p0_params();
  const FlatStationary fs = flat_stationary(p);
  const GammaStarResult gs = gamma_star(p, fs, 64);
  CHECK(rel_err(gs.value, frozen::kGammaStar) <= 1e-12);
  REQUIRE(gs.argmax_k.size() == 1);
  CHECK(gs.argmax_k[0] == frozen::kArgmaxK);
  CHECK(gs.tail_bound_ok);
  CHECK(rel_err(gs.tail_bound, frozen::kTailBoundK64) <= 1e-12);
}

TEST_CASE("classification: the stability dichotomy around gamma_star") {
  const TumorParams p = p0_params();
  const FlatStationary fs = flat_stationary(p);

  const SpectrumReport stable =
      classify_stability(p, fs, 2.0 * frozen::kGammaStar, 64);
  CHECK(stable.classification == Classification::Stable);
  CHECK(stable.unstable_modes.empty());
  // uniform decay margin: min(nu, tanh(rho_s) (gamma - gamma_star))
  const double expect_varpi = std::min(
      1.0, std::tanh(fs.rho_s) * (2.0 * frozen::kGammaStar - frozen::kGammaStar));
  CHECK(rel_err(stable.varpi, expect_varpi) <= 1e-12);

  const SpectrumReport unstable =
      classify_stability(p, fs, 0.5 * frozen::kGammaStar, 64);
  CHECK(unstable.classification == Classification::Unstable);
  REQUIRE(unstable.unstable_modes.size() == 1);
  CHECK(unstable.unstable_modes[0] == 1);
  CHECK(unstable.varpi == 0.0);

  const SpectrumReport marginal =
      classify_stability(p, fs, unstable.gamma_star, 64);
  CHECK(marginal.classification == Classification::Marginal);
}

TEST_CASE("tail certificate failure raises TailNotCertified with a hint") {
  // Near the existence threshold the whole spectrum flattens: at
  // (sigma_hat, sigma_tilde, sigma_bar) = (1, 1.05, 1.2) the maximum of
  // gamma_k over k <= 8 is ~4.96e-4 while the K_max = 8 tail bound is
  // ~5.86e-4, so the certificate cannot close and must fail loudly.
  TumorParams p = p0_params();
  p.sigma_tilde = 1.05;
  p.sigma_bar = 1.2;
  const FlatStationary fs = flat_stationary(p);
  try {
    classify_stability(p, fs, 1.0, 8);
    FAIL_CHECK("expected TailNotCertified");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TailNotCertified);
    CHECK(std::string(e.what()).find("K_max") != std::string::npos);
  }
  // the suggested remedy (double K_max) genuinely certifies
  const SpectrumReport rep = classify_stability(p, fs, 1.0, 16);
  CHECK(rep.tail_bound_ok);
}

TEST_CASE("mode profiles: boundary values, continuity, and coefficients") {
  const TumorParams p = p0_params();
  const FlatStationary fs = flat_stationary(p);
  const double gamma = 1.0;

  CHECK(coeff_d_k(p, fs, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rel_err(coeff_d_k(p, fs, 1), frozen::kD1) <= 1e-12);
  CHECK(rel_err(coeff_e_k(p, fs, 1), frozen::kE1) <= 1e-12);

  for (int k : {1, 2, 5}) {
    CAPTURE(k);
    // nutrient perturbation: a_k(eta_s) = 0, a_k(rho_s) = -S
    CHECK(std::fabs(eval_a_k(p, fs, k, fs.eta_s)) <= 1e-12);
    CHECK(rel_err(eval_a_k(p, fs, k, fs.rho_s), -frozen::kS) <= 1e-12);
    // pressure perturbation: continuous at eta_s, b_k(rho_s) = gamma k^2
    const double bl = eval_b_k_lower(p, fs, k, gamma, fs.eta_s);
    const double bu = eval_b_k_upper(p, fs, k, gamma, fs.eta_s);
    CHECK(std::fabs(bl - bu) <= 1e-10 * (1.0 + std::fabs(bu)));
    CHECK(rel_err(eval_b_k_upper(p, fs, k, gamma, fs.rho_s),
                  gamma * double(k) * k) <= 1e-11);
    // lower branch satisfies b'' = k^2 b: also fixes b'(0) = 0 by symmetry
    const double h = 1e-4;
    const double b0 = eval_b_k_lower(p, fs, k, gamma, h);
    const double bm = eval_b_k_lower(p, fs, k, gamma, 0.0);
    CHECK(std::fabs((b0 - bm) / h) <= 1e-2 * (1.0 + std::fabs(bm)) * k * k);
  }

  const ModeProfile mp = mode_profiles(p, fs, 3, gamma, 101);
  CHECK(mp.k == 3);
  CHECK(mp.c_k == 1.0);
  REQUIRE(mp.y_a.size() == 101);
  REQUIRE(mp.a.size() == 101);
  REQUIRE(mp.y_b.size() == mp.b.size());
  CHECK(mp.y_a.front() == doctest::Approx(fs.eta_s));
  CHECK(mp.y_a.back() == doctest::Approx(fs.rho_s));
  CHECK(mp.y_b.front() == doctest::Approx(0.0));
  CHECK(mp.y_b.back() == doctest::Approx(fs.rho_s));
  CHECK(rel_err(mp.d_k, coeff_d_k(p, fs, 3)) <= 1e-14);
  CHECK(rel_err(mp.e_k, coeff_e_k(p, fs, 3)) <= 1e-14);

  // ODE residual of the sampled nutrient profile: a'' = (k^2+1) a
  // (central differences on the uniform sample grid)
  const double hs = mp.y_a[1] - mp.y_a[0];
  double worst = 0.0;
  for (std::size_t j = 1; j + 1 < mp.a.size(); ++j) {
    const double second = (mp.a[j + 1] - 2.0 * mp.a[j] + mp.a[j - 1]) / (hs * hs);
    worst = std::max(worst, std::fabs(second - 10.0 * mp.a[j]));
  }
  CHECK(worst <= 1e-2 * frozen::kS);  // O(h^2) envelope, h ~ 0.025
}

TEST_CASE("gamma_star sensitivity in nu: frozen values and monotonicity") {
  const TumorParams p = p0_params();
  const std::vector<double> nu_grid = {0.5, 1.0, 2.0};
  const auto rows = gamma_star_sensitivity(p, nu_grid, 64);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].first == 0.5);
  CHECK(rel_err(rows[0].second, frozen::kGammaStarNuHalf) <= 1e-12);
  CHECK(rel_err(rows[1].second, frozen::kGammaStarNu1) <= 1e-12);
  CHECK(rel_err(rows[2].second, frozen::kGammaStarNu2) <= 1e-12);
  CHECK(rows[0].second >= rows[1].second);
  CHECK(rows[1].second >= rows[2].second);
}

TEST_CASE("d gamma_k / d nu <= 0 holds mode-by-mode (finite differences)") {
  const TumorParams base = p0_params();
  const double dnu = 1e-3;
  for (int k = 1; k <= 8; ++k) {
    TumorParams hi = base;
    hi.nu = base.nu + dnu;
    const FlatStationary fs_lo = flat_stationary(base);
    const FlatStationary fs_hi = flat_stationary(hi);
    const double g_lo = gamma_k(base, fs_lo, k);
    const double g_hi = gamma_k(hi, fs_hi, k);
    CAPTURE(k);
    if (k <= 5) {
      CHECK(g_hi <= g_lo);  // strictly decreasing, FD-resolvable
    } else {
      // derivative magnitude falls below double rounding near k ~ 6-8;
      // allow equality to a few ulps
      CHECK(g_hi <= g_lo + 1e-14 * std::fabs(g_lo));
    }
  }
}

TEST_CASE("invalid mode/argument handling") {
  const TumorParams p = p0_params();
  const FlatStationary fs = flat_stationary(p);
  CHECK_THROWS_AS(gamma_k(p, fs, 0), Error);  // gamma_0 undefined
  CHECK_THROWS_AS(gamma_star(p, fs, 0), Error);
  CHECK_THROWS_AS(mode_profiles(p, fs, 1, 1.0, 1), Error);
}
