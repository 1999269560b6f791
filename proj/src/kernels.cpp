// kernels.cpp — scalar reference kernels and the AVX2+FMA variants.
//
// Bitwise-equivalence contract: for every kernel and every input, the scalar
// and AVX2 backends return identical doubles.  Reductions pin the exact
// accumulation tree (see block diagrams inline); elementwise kernels perform
// the same fused-multiply-add chain per element.  The unit suite asserts the
// equivalence on randomized inputs, including ragged tails.
#include "necrostrip/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "necrostrip/errors.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define NECROSTRIP_X86 1
#include <immintrin.h>
#else
#define NECROSTRIP_X86 0
#endif

namespace necrostrip::kern {

namespace {

// =====================================================================
// scalar reference backend
// =====================================================================
//
// The reduction layout mirrors the AVX2 code: 4 accumulator groups of 4
// lanes each walk the input in blocks of 16; groups are combined pairwise
// ((g0+g1) + (g2+g3), lanewise), the 4 surviving lanes fold as
// ((l0+l2) + (l1+l3)), and the scalar tail is added last.

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc[4][4] = {};
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16)
    for (int g = 0; g < 4; ++g)
      for (int l = 0; l < 4; ++l)
        acc[g][l] = std::fma(x[i + 4 * g + l], y[i + 4 * g + l], acc[g][l]);
  double lane[4];
  for (int l = 0; l < 4; ++l)
    lane[l] = (acc[0][l] + acc[1][l]) + (acc[2][l] + acc[3][l]);
  double head = (lane[0] + lane[2]) + (lane[1] + lane[3]);
  double tail = 0.0;
  for (; i < n; ++i) tail = std::fma(x[i], y[i], tail);
  return head + tail;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void combine2_scalar(double* z, double a, const double* x,
                     double b, const double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] = std::fma(b, y[i], a * x[i]);
}

void combine3_scalar(double* z, double a, const double* x,
                     double b, const double* y,
                     double c, const double* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    z[i] = std::fma(c, w[i], std::fma(b, y[i], a * x[i]));
}

void ewmul_add_scalar(double* z, const double* c, const double* x,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) z[i] = std::fma(c[i], x[i], z[i]);
}

double max_abs_scalar(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

constexpr KernelTable kScalarTable = {
    dot_scalar,     axpy_scalar,      combine2_scalar,
    combine3_scalar, ewmul_add_scalar, max_abs_scalar};

// =====================================================================
// AVX2 + FMA backend (x86-64 only; dispatched at runtime via CPUID)
// =====================================================================

#if NECROSTRIP_X86

__attribute__((target("avx2,fma")))
double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i),      _mm256_loadu_pd(y + i),      a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4),  _mm256_loadu_pd(y + i + 4),  a1);
    a2 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 8),  _mm256_loadu_pd(y + i + 8),  a2);
    a3 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 12), _mm256_loadu_pd(y + i + 12), a3);
  }
  __m256d s = _mm256_add_pd(_mm256_add_pd(a0, a1), _mm256_add_pd(a2, a3));
  __m128d lo = _mm256_castpd256_pd128(s);        // lanes 0,1
  __m128d hi = _mm256_extractf128_pd(s, 1);      // lanes 2,3
  __m128d pair = _mm_add_pd(lo, hi);             // (l0+l2, l1+l3)
  double head = _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
  double tail = 0.0;
  for (; i < n; ++i) tail = std::fma(x[i], y[i], tail);
  return head + tail;
}

__attribute__((target("avx2,fma")))
void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

__attribute__((target("avx2,fma")))
void combine2_avx2(double* z, double a, const double* x,
                   double b, const double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(z + i, _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i), t));
  }
  for (; i < n; ++i) z[i] = std::fma(b, y[i], a * x[i]);
}

__attribute__((target("avx2,fma")))
void combine3_avx2(double* z, double a, const double* x,
                   double b, const double* y,
                   double c, const double* w, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a), vb = _mm256_set1_pd(b),
                vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d t = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    t = _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i), t);
    _mm256_storeu_pd(z + i, _mm256_fmadd_pd(vc, _mm256_loadu_pd(w + i), t));
  }
  for (; i < n; ++i)
    z[i] = std::fma(c, w[i], std::fma(b, y[i], a * x[i]));
}

__attribute__((target("avx2,fma")))
void ewmul_add_avx2(double* z, const double* c, const double* x,
                    std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(z + i, _mm256_fmadd_pd(_mm256_loadu_pd(c + i),
                                            _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(z + i)));
  for (; i < n; ++i) z[i] = std::fma(c[i], x[i], z[i]);
}

__attribute__((target("avx2,fma")))
double max_abs_avx2(const double* x, std::size_t n) {
  // |x| via sign-bit clear; max is exact so lane order does not matter.
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
  __m128d lo = _mm256_castpd256_pd128(m);
  __m128d hi = _mm256_extractf128_pd(m, 1);
  __m128d pair = _mm_max_pd(lo, hi);
  double head = std::max(_mm_cvtsd_f64(pair),
                         _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair)));
  for (; i < n; ++i) head = std::max(head, std::fabs(x[i]));
  return head;
}

constexpr KernelTable kAvx2Table = {
    dot_avx2,     axpy_avx2,      combine2_avx2,
    combine3_avx2, ewmul_add_avx2, max_abs_avx2};

bool cpu_has_avx2() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

#else   // !NECROSTRIP_X86

bool cpu_has_avx2() { return false; }

#endif  // NECROSTRIP_X86

Backend resolve_from_env() {
  const char* env = std::getenv("NECROSTRIP_SIMD");
  const std::string mode = env ? env : "auto";
  if (mode == "scalar") return Backend::Scalar;
  if (mode == "avx2") {
    if (!backend_available(Backend::Avx2))
      throw Error(ErrorKind::ConfigError,
                  "NECROSTRIP_SIMD=avx2 requested but AVX2+FMA is not "
                  "available on this CPU/build");
    return Backend::Avx2;
  }
  if (mode == "auto")
    return backend_available(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
  throw Error(ErrorKind::ConfigError,
              "NECROSTRIP_SIMD must be one of scalar|avx2|auto, got '" +
                  mode + "'");
}

}  // namespace

const char* backend_name(Backend b) {
  return b == Backend::Avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend b) {
  if (b == Backend::Scalar) return true;
  return cpu_has_avx2();
}

Backend active_backend() {
  static const Backend chosen = resolve_from_env();
  return chosen;
}

const KernelTable& table(Backend b) {
  if (b == Backend::Scalar) return kScalarTable;
#if NECROSTRIP_X86
  if (cpu_has_avx2()) return kAvx2Table;
#endif
  throw Error(ErrorKind::ConfigError,
              "AVX2 kernel table requested but unavailable");
}

double dot(const double* x, const double* y, std::size_t n) {
  return table(active_backend()).dot(x, y, n);
}
void axpy(double a, const double* x, double* y, std::size_t n) {
  table(active_backend()).axpy(a, x, y, n);
}
void combine2(double* z, double a, const double* x,
              double b, const double* y, std::size_t n) {
  table(active_backend()).combine2(z, a, x, b, y, n);
}
void combine3(double* z, double a, const double* x,
              double b, const double* y,
              double c, const double* w, std::size_t n) {
  table(active_backend()).combine3(z, a, x, b, y, c, w, n);
}
void ewmul_add(double* z, const double* c, const double* x, std::size_t n) {
  table(active_backend()).ewmul_add(z, c, x, n);
}
double max_abs(const double* x, std::size_t n) {
  return table(active_backend()).max_abs(x, n);
}

}  // namespace necrostrip::kern
