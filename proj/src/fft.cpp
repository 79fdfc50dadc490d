// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsrn/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace dsrn {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

namespace {

void transform(std::vector<std::complex<double>> &x, bool inverse) {
  const size_t n = x.size();
  if (!is_power_of_two(static_cast<int>(n)))
    throw std::invalid_argument("fft: size must be a power of two");
  if (n == 1) return;

  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  const double sign = inverse ? 1.0 : -1.0;
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = x[i + k];
        std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace

void fft(std::vector<std::complex<double>> &x) { transform(x, false); }

void ifft(std::vector<std::complex<double>> &x) {
  transform(x, true);
  const double inv = 1.0 / static_cast<double>(x.size());
  for (auto &v : x) v *= inv;
}

}  // namespace dsrn
