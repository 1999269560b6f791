// fft.hpp — deterministic radix-2 complex FFT and periodic spectral helpers.
//
// A hand-rolled iterative Cooley-Tukey transform keeps the artifact free of
// external FFT libraries and guarantees bitwise-reproducible results across
// runs and thread schedules (fixed butterfly order, precomputed twiddles).
// Transform sizes are the x-resolutions of the strip (powers of two <= 4096),
// where an O(n log n) textbook kernel is more than fast enough.
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace necrostrip {

/** True when n is a power of two (and n >= 1). */
constexpr bool is_pow2(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

/**
 * Fixed-size FFT plan.  forward() computes X_k = sum_n x_n e^{-2*pi*i*k*n/N};
 * inverse() is the unitary-up-to-1/N inverse (includes the 1/N factor).
 */
class Fft {
 public:
  /** n must be a power of two; throws ConfigError otherwise. */
  explicit Fft(std::size_t n);

  std::size_t size() const { return n_; }

  void forward(std::complex<double>* data) const;
  void inverse(std::complex<double>* data) const;

 private:
  void transform(std::complex<double>* data, bool invert) const;

  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> twiddle_fwd_;  // e^{-2*pi*i*j/N}, j < N/2
  std::vector<std::complex<double>> twiddle_inv_;
};

/**
 * Spectral x-derivative of a periodic sample vector: multiply mode k by
 * (i k)^order on the balanced wavenumber set {-n/2+1, ..., n/2}; for odd
 * orders the Nyquist mode is annihilated (its derivative is not
 * representable on the grid).
 */
std::vector<double> spectral_derivative(const Fft& fft,
                                        const std::vector<double>& f,
                                        int order);

/**
 * One-sided Fourier coefficients c_k = (1/n) sum_j f_j e^{-i k x_j} for
 * 0 <= k <= n/2 (x_j = 2*pi*j/n).
 */
std::vector<std::complex<double>> mode_coefficients(
    const Fft& fft, const std::vector<double>& f);

/**
 * Real mode amplitudes: A_0 = |c_0|, A_k = 2|c_k| for 0 < k < n/2, and
 * A_{n/2} = |c_{n/2}| (Nyquist).  Length n/2 + 1.
 */
std::vector<double> mode_amplitudes(const Fft& fft,
                                    const std::vector<double>& f);

}  // namespace necrostrip
