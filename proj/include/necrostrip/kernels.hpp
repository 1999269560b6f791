// kernels.hpp — dense vector kernels with runtime-dispatched SIMD backends.
//
// The iterative elliptic solvers spend nearly all their time in a handful of
// BLAS-1-style operations over nx*ny node vectors.  Each operation exists in
// a portable scalar reference form and (on x86-64) an AVX2+FMA form; the two
// are bitwise identical by construction:
//
//   * elementwise kernels use one fused multiply-add chain per element, with
//     std::fma in the scalar path mirroring the vector fmadd;
//   * reductions fix a blocked accumulation tree (4 accumulator groups of 4
//     lanes, combined pairwise, scalar tail added last) that both backends
//     implement literally.
//
// Backend selection happens once per process: the NECROSTRIP_SIMD environment
// variable ("scalar" | "avx2" | "auto", default "auto") filtered by CPUID.
#pragma once

#include <cstddef>

namespace necrostrip::kern {

enum class Backend { Scalar, Avx2 };

/** Stable lower-case name of a backend ("scalar", "avx2"). */
const char* backend_name(Backend b);

/** True when the backend can execute on this CPU / build. */
bool backend_available(Backend b);

/**
 * Backend requested by NECROSTRIP_SIMD filtered by availability.
 * Throws ConfigError for an unknown value or an explicit request for an
 * unavailable backend.  The result is computed once and cached.
 */
Backend active_backend();

/** Function-pointer table of one backend (exposed for equivalence tests). */
struct KernelTable {
  double (*dot)(const double* x, const double* y, std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*combine2)(double* z, double a, const double* x,
                   double b, const double* y, std::size_t n);
  void (*combine3)(double* z, double a, const double* x,
                   double b, const double* y,
                   double c, const double* w, std::size_t n);
  void (*ewmul_add)(double* z, const double* c, const double* x,
                    std::size_t n);
  double (*max_abs)(const double* x, std::size_t n);
};

/** Table for an explicit backend; throws ConfigError if unavailable. */
const KernelTable& table(Backend b);

// ---- dispatched entry points (use active_backend()) ------------------------

/** Inner product sum_i x[i]*y[i]. */
double dot(const double* x, const double* y, std::size_t n);

/** y[i] += a*x[i]. */
void axpy(double a, const double* x, double* y, std::size_t n);

/** z[i] = a*x[i] + b*y[i];  z may alias x or y. */
void combine2(double* z, double a, const double* x,
              double b, const double* y, std::size_t n);

/** z[i] = a*x[i] + b*y[i] + c*w[i];  z may alias any input. */
void combine3(double* z, double a, const double* x,
              double b, const double* y,
              double c, const double* w, std::size_t n);

/** z[i] += c[i]*x[i] (elementwise coefficient field). */
void ewmul_add(double* z, const double* c, const double* x, std::size_t n);

/** max_i |x[i]|; 0 for n = 0. */
double max_abs(const double* x, std::size_t n);

}  // namespace necrostrip::kern
