// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Core>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace dsrn {

// All numerics run in 64-bit floating point. Frame matrices are row-major,
// rows = time frames, cols = frequency bins.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CplxMat =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

struct Waveform {
  std::vector<double> samples;  // nominal range [-1, 1]
  int sample_rate_hz = 0;
};

void validate_waveform(const Waveform &w);

struct SpectrogramMeta {
  int window_len = 512;
  int hop_len = 128;
  int sample_rate_hz = 16000;

  int bin_count() const { return window_len / 2 + 1; }
};

struct ComplexSpectrogram {
  CplxMat frames;  // T x F
  SpectrogramMeta meta;

  int frame_count() const { return static_cast<int>(frames.rows()); }
  int bin_count() const { return static_cast<int>(frames.cols()); }
};

struct MagnitudeSpectrogram {
  Mat frames;  // T x F, entrywise >= 0
  SpectrogramMeta meta;

  int frame_count() const { return static_cast<int>(frames.rows()); }
  int bin_count() const { return static_cast<int>(frames.cols()); }
};

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_same_shape(const Mat &a, const Mat &b, const std::string &what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(what + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
}

}  // namespace dsrn
