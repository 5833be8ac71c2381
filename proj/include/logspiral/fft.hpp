#pragma once

#include <bit>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "logspiral/params.hpp"

// Minimal iterative radix-2 FFT.  Grid sizes in this project are always
// powers of two and small (<= 2^13), so a self-contained transform keeps the
// library header-only, reentrant and bit-deterministic.

namespace logspiral::detail {

inline bool is_pow2(std::size_t n) { return n != 0 && std::has_single_bit(n); }

/// In-place DFT with twiddles read from a precomputed table (no accumulated
/// rotation error).  sign = -1: forward sum_k x_k e^{-2pi i jk/n};
/// sign = +1: unscaled inverse.
inline void fft_inplace(std::vector<std::complex<double>>& a, int sign) {
  const std::size_t n = a.size();
  if (!is_pow2(n)) throw std::invalid_argument("fft: size must be a power of two");
  if (n == 1) return;

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  std::vector<std::complex<double>> roots(n / 2);
  const double ang = sign * two_pi / static_cast<double>(n);
  for (std::size_t j = 0; j < n / 2; ++j)
    roots[j] = std::polar(1.0, ang * static_cast<double>(j));

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * roots[k * stride];
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

/// FFT bin index -> signed frequency in [-n/2, n/2).
inline int signed_frequency(std::size_t k, std::size_t n) {
  return k < n / 2 ? static_cast<int>(k) : static_cast<int>(k) - static_cast<int>(n);
}

}  // namespace logspiral::detail
