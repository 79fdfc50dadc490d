// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>

#include "dsrn/types.hpp"

namespace dsrn {

// Reads a RIFF/WAVE file. Only PCM 16-bit mono is accepted; samples are
// scaled to [-1, 1] by dividing by 32768.
Waveform read_wav(const std::string &path);

// Writes PCM 16-bit mono. Samples are quantized with round(x * 32768) and
// clamped to the int16 range; values outside [-1, 1] clip.
void write_wav(const std::string &path, const Waveform &w);

}  // namespace dsrn
