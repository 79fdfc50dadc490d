// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <vector>

namespace dsrn {

// In-place iterative radix-2 FFT. Size must be a power of two.
void fft(std::vector<std::complex<double>> &x);

// Inverse transform, scaled by 1/N.
void ifft(std::vector<std::complex<double>> &x);

bool is_power_of_two(int n);

}  // namespace dsrn
