// fft.cpp — iterative radix-2 Cooley-Tukey with precomputed twiddles.
#include "necrostrip/fft.hpp"

#include <cmath>
#include <numbers>

#include "necrostrip/errors.hpp"

namespace necrostrip {

Fft::Fft(std::size_t n) : n_(n) {
  if (!is_pow2(n))
    throw Error(ErrorKind::ConfigError,
                "FFT size must be a power of two, got " + std::to_string(n));
  bitrev_.resize(n);
  std::size_t log2n = 0;
  while ((std::size_t{1} << log2n) < n) ++log2n;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < log2n; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
    bitrev_[i] = r;
  }
  twiddle_fwd_.resize(n / 2);
  twiddle_inv_.resize(n / 2);
  for (std::size_t j = 0; j < n / 2; ++j) {
    const double ang = -2.0 * std::numbers::pi *
                       static_cast<double>(j) / static_cast<double>(n);
    twiddle_fwd_[j] = {std::cos(ang), std::sin(ang)};
    twiddle_inv_[j] = {std::cos(ang), -std::sin(ang)};
  }
}

void Fft::transform(std::complex<double>* a, bool invert) const {
  const auto& tw = invert ? twiddle_inv_ : twiddle_fwd_;
  for (std::size_t i = 0; i < n_; ++i)
    if (bitrev_[i] > i) std::swap(a[i], a[bitrev_[i]]);
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t stride = n_ / len;
    for (std::size_t i = 0; i < n_; i += len)
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * tw[j * stride];
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
      }
  }
}

void Fft::forward(std::complex<double>* data) const { transform(data, false); }

void Fft::inverse(std::complex<double>* data) const {
  transform(data, true);
  const double inv_n = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) data[i] *= inv_n;
}

std::vector<double> spectral_derivative(const Fft& fft,
                                        const std::vector<double>& f,
                                        int order) {
  const std::size_t n = fft.size();
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = f[i];
  fft.forward(buf.data());
  for (std::size_t j = 0; j < n; ++j) {
    // balanced wavenumber: j <= n/2 maps to k = j, else k = j - n
    const double k = (j <= n / 2) ? static_cast<double>(j)
                                  : static_cast<double>(j) - static_cast<double>(n);
    std::complex<double> mult = 1.0;
    const std::complex<double> ik(0.0, k);
    for (int p = 0; p < order; ++p) mult *= ik;
    if (order % 2 == 1 && j == n / 2) mult = 0.0;  // odd derivative of Nyquist
    buf[j] *= mult;
  }
  fft.inverse(buf.data());
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[i].real();
  return out;
}

std::vector<std::complex<double>> mode_coefficients(
    const Fft& fft, const std::vector<double>& f) {
  const std::size_t n = fft.size();
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = f[i];
  fft.forward(buf.data());
  std::vector<std::complex<double>> out(n / 2 + 1);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k <= n / 2; ++k) out[k] = buf[k] * inv_n;
  return out;
}

std::vector<double> mode_amplitudes(const Fft& fft,
                                    const std::vector<double>& f) {
  const auto c = mode_coefficients(fft, f);
  std::vector<double> amp(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const bool interior = (k > 0 && k < c.size() - 1);
    amp[k] = (interior ? 2.0 : 1.0) * std::abs(c[k]);
  }
  return amp;
}

}  // namespace necrostrip
