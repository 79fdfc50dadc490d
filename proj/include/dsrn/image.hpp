// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsrn/types.hpp"

namespace dsrn {

// log(1 + X) mapped linearly to 8-bit grayscale. Row 0 is the highest
// frequency bin (frequency ascends upward), time runs left to right, so the
// image is F pixels tall and T pixels wide.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // row-major, height * width
};

GrayImage spectrogram_to_image(const Mat &mag);

void write_pgm(const std::string &path, const GrayImage &img);
void write_png(const std::string &path, const GrayImage &img);  // zlib-backed

// Dispatches on extension: .png writes PNG, anything else PGM (P5).
void write_spectrogram_image(const std::string &path, const Mat &mag);

}  // namespace dsrn
