// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "dsrn/types.hpp"

namespace dsrn {

struct MelConfig {
  int n_mels = 80;
  double fmin_hz = 0.0;
  double fmax_hz = 0.0;  // 0 means sample_rate / 2
  double floor_value = 1e-10;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filterbank, n_mels x bins. Triangles are built in the mel domain
// (HTK convention), peak value 1, no area normalization.
Mat mel_filterbank(const MelConfig &cfg, int bins, int window_len, int sample_rate_hz);

// log(max(filterbank * power, floor_value)) per frame; power = magnitude^2.
// Returns T x n_mels.
Mat log_mel(const MagnitudeSpectrogram &mag, const MelConfig &cfg);

// Same computation from a raw magnitude matrix and a prebuilt filterbank.
Mat log_mel_features(const Mat &mag, const Mat &filterbank, double floor_value);

}  // namespace dsrn
