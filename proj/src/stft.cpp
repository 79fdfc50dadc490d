// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsrn/stft.hpp"

#include <cmath>

#include "dsrn/fft.hpp"

namespace dsrn {

Vec hann_window(int n) {
  Vec w(n);
  for (int k = 0; k < n; ++k)
    w[k] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(k) / n));
  return w;
}

namespace {

// Reflect padding without edge duplication: [.. x2 x1] x0 x1 .. xe [xe-1 xe-2 ..]
std::vector<double> reflect_pad(const std::vector<double> &x, int pad) {
  const int n = static_cast<int>(x.size());
  std::vector<double> out;
  out.reserve(x.size() + 2 * static_cast<size_t>(pad));
  for (int i = pad; i >= 1; --i) out.push_back(x[static_cast<size_t>(i)]);
  out.insert(out.end(), x.begin(), x.end());
  for (int i = n - 2; i >= n - 1 - pad; --i) out.push_back(x[static_cast<size_t>(i)]);
  return out;
}

}  // namespace

ComplexSpectrogram stft(const Waveform &w, int window_len, int hop_len) {
  validate_waveform(w);
  if (hop_len < 1 || window_len < hop_len)
    throw std::invalid_argument("stft: require window_len >= hop_len >= 1");
  if (!is_power_of_two(window_len))
    throw std::invalid_argument("stft: window_len must be a power of two");

  const int pad = window_len / 2;
  const int n = static_cast<int>(w.samples.size());
  if (n < pad + 1) throw std::runtime_error("stft: waveform too short");
  std::vector<double> x = reflect_pad(w.samples, pad);

  const int padded_len = static_cast<int>(x.size());
  if (padded_len < window_len) throw std::runtime_error("stft: waveform too short");
  const int frames = (padded_len - window_len) / hop_len + 1;
  const int bins = window_len / 2 + 1;
  const Vec win = hann_window(window_len);

  ComplexSpectrogram out;
  out.meta = {window_len, hop_len, w.sample_rate_hz};
  out.frames.resize(frames, bins);

  std::vector<std::complex<double>> buf(static_cast<size_t>(window_len));
  for (int t = 0; t < frames; ++t) {
    const int off = t * hop_len;
    for (int k = 0; k < window_len; ++k)
      buf[static_cast<size_t>(k)] = x[static_cast<size_t>(off + k)] * win[k];
    fft(buf);
    for (int f = 0; f < bins; ++f) out.frames(t, f) = buf[static_cast<size_t>(f)];
  }
  return out;
}

Waveform istft(const ComplexSpectrogram &c) {
  const int window_len = c.meta.window_len;
  const int hop_len = c.meta.hop_len;
  const int frames = c.frame_count();
  const int bins = window_len / 2 + 1;
  if (frames < 1) throw std::invalid_argument("istft: empty spectrogram");
  if (c.bin_count() != bins) throw std::invalid_argument("istft: bin count inconsistent");

  const Vec win = hann_window(window_len);
  const int out_len = (frames - 1) * hop_len + window_len;
  std::vector<double> acc(static_cast<size_t>(out_len), 0.0);
  std::vector<double> norm(static_cast<size_t>(out_len), 0.0);

  std::vector<std::complex<double>> buf(static_cast<size_t>(window_len));
  for (int t = 0; t < frames; ++t) {
    for (int f = 0; f < bins; ++f) buf[static_cast<size_t>(f)] = c.frames(t, f);
    for (int f = bins; f < window_len; ++f)
      buf[static_cast<size_t>(f)] = std::conj(c.frames(t, window_len - f));
    ifft(buf);
    const int off = t * hop_len;
    for (int k = 0; k < window_len; ++k) {
      acc[static_cast<size_t>(off + k)] += buf[static_cast<size_t>(k)].real() * win[k];
      norm[static_cast<size_t>(off + k)] += win[k] * win[k];
    }
  }

  Waveform out;
  out.sample_rate_hz = c.meta.sample_rate_hz;
  out.samples.resize(static_cast<size_t>(out_len));
  constexpr double kTiny = 1e-12;
  for (int i = 0; i < out_len; ++i) {
    const size_t u = static_cast<size_t>(i);
    if (norm[u] > kTiny) {
      out.samples[u] = acc[u] / norm[u];
    } else if (std::abs(acc[u]) > 1e-6) {
      // a sample carries signal but has no window energy: broken COLA setup
      throw std::runtime_error("istft: zero normalization denominator at sample " +
                               std::to_string(i));
    } else {
      out.samples[u] = 0.0;
    }
  }
  return out;
}

Waveform istft_trimmed(const ComplexSpectrogram &c, size_t original_len) {
  Waveform full = istft(c);
  const size_t pad = static_cast<size_t>(c.meta.window_len / 2);
  if (pad + original_len > full.samples.size())
    throw std::invalid_argument("istft_trimmed: original_len too large");
  Waveform out;
  out.sample_rate_hz = full.sample_rate_hz;
  out.samples.assign(full.samples.begin() + static_cast<long>(pad),
                     full.samples.begin() + static_cast<long>(pad + original_len));
  return out;
}

MagnitudeSpectrogram magnitude(const ComplexSpectrogram &c) {
  MagnitudeSpectrogram out;
  out.meta = c.meta;
  out.frames = c.frames.cwiseAbs();
  return out;
}

Mat phase(const ComplexSpectrogram &c) {
  Mat out(c.frames.rows(), c.frames.cols());
  for (Eigen::Index t = 0; t < c.frames.rows(); ++t)
    for (Eigen::Index f = 0; f < c.frames.cols(); ++f) {
      const std::complex<double> &z = c.frames(t, f);
      out(t, f) = (z.real() == 0.0 && z.imag() == 0.0) ? 0.0 : std::atan2(z.imag(), z.real());
    }
  return out;
}

ComplexSpectrogram reconstruct(const MagnitudeSpectrogram &mag, const Mat &phase_angles) {
  require_same_shape(mag.frames, phase_angles, "reconstruct");
  ComplexSpectrogram out;
  out.meta = mag.meta;
  out.frames.resize(mag.frames.rows(), mag.frames.cols());
  for (Eigen::Index t = 0; t < mag.frames.rows(); ++t)
    for (Eigen::Index f = 0; f < mag.frames.cols(); ++f)
      out.frames(t, f) = std::polar(mag.frames(t, f), phase_angles(t, f));
  return out;
}

}  // namespace dsrn
