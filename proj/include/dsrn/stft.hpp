// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "dsrn/types.hpp"

namespace dsrn {

// Periodic Hann window of length n: w[k] = 0.5 * (1 - cos(2*pi*k/n)).
Vec hann_window(int n);

// Analysis parameters. The waveform is reflect-padded by window_len/2 on both
// ends before framing, so frame t is centered at sample t * hop_len.
// window_len must be a power of two and window_len >= hop_len >= 1.
ComplexSpectrogram stft(const Waveform &w, int window_len, int hop_len);

// Overlap-add synthesis with window-square normalization. Output length is
// the padded analysis length: (T - 1) * hop + window. Samples whose window
// energy is ~0 (only the very first padded sample for a Hann window) are 0.
Waveform istft(const ComplexSpectrogram &c);

// istft followed by removal of the analysis padding, cut to original_len.
Waveform istft_trimmed(const ComplexSpectrogram &c, size_t original_len);

MagnitudeSpectrogram magnitude(const ComplexSpectrogram &c);

// Entrywise argument; zero entries get phase 0 by convention.
Mat phase(const ComplexSpectrogram &c);

// Entrywise mag * exp(i * phase).
ComplexSpectrogram reconstruct(const MagnitudeSpectrogram &mag, const Mat &phase_angles);

}  // namespace dsrn
