// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsrn/mel.hpp"

#include <cmath>

namespace dsrn {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Mat mel_filterbank(const MelConfig &cfg, int bins, int window_len, int sample_rate_hz) {
  const double nyquist = sample_rate_hz / 2.0;
  const double fmax = cfg.fmax_hz > 0.0 ? cfg.fmax_hz : nyquist;
  if (cfg.n_mels < 1) throw std::invalid_argument("mel_filterbank: n_mels must be >= 1");
  if (!(cfg.fmin_hz >= 0.0 && cfg.fmin_hz < fmax && fmax <= nyquist))
    throw std::invalid_argument("mel_filterbank: require 0 <= fmin < fmax <= nyquist");
  if (cfg.floor_value <= 0.0)
    throw std::invalid_argument("mel_filterbank: floor_value must be positive");

  const double mel_lo = hz_to_mel(cfg.fmin_hz);
  const double mel_hi = hz_to_mel(fmax);
  const int m = cfg.n_mels;
  std::vector<double> pts(static_cast<size_t>(m) + 2);
  for (int i = 0; i < m + 2; ++i)
    pts[static_cast<size_t>(i)] = mel_lo + (mel_hi - mel_lo) * i / (m + 1);

  Mat fb = Mat::Zero(m, bins);
  for (int f = 0; f < bins; ++f) {
    const double mel = hz_to_mel(static_cast<double>(f) * sample_rate_hz / window_len);
    for (int i = 0; i < m; ++i) {
      const double lo = pts[static_cast<size_t>(i)];
      const double c = pts[static_cast<size_t>(i) + 1];
      const double hi = pts[static_cast<size_t>(i) + 2];
      if (mel > lo && mel < hi)
        fb(i, f) = mel <= c ? (mel - lo) / (c - lo) : (hi - mel) / (hi - c);
    }
  }
  return fb;
}

Mat log_mel_features(const Mat &mag, const Mat &filterbank, double floor_value) {
  Mat power = mag.cwiseProduct(mag);
  Mat mel = power * filterbank.transpose();  // T x n_mels
  return mel.cwiseMax(floor_value).array().log().matrix();
}

Mat log_mel(const MagnitudeSpectrogram &mag, const MelConfig &cfg) {
  Mat fb = mel_filterbank(cfg, mag.bin_count(), mag.meta.window_len, mag.meta.sample_rate_hz);
  return log_mel_features(mag.frames, fb, cfg.floor_value);
}

}  // namespace dsrn
