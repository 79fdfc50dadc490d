// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsrn/types.hpp"

namespace dsrn {

struct MixSpec {
  enum class SnrMode { Fixed, RandomFromSet };
  SnrMode snr_mode = SnrMode::RandomFromSet;
  double snr_db = 0.0;                              // used in Fixed mode
  std::vector<double> snr_set = {-10.0, -5.0, 0.0, 5.0};
  uint64_t seed = 0;
  int noise_index = -1;  // fixed noise file index, or -1 for per-utterance random
};

struct Manifest {
  std::string utt_id;
  std::string clean_path;
  std::string noise_path;
  std::string mixed_path;
  double snr_db = 0.0;
  uint64_t seed = 0;
  int64_t noise_offset = 0;
  double export_gain = 1.0;  // gain applied when writing mixed_path as PCM16
};

struct MixResult {
  Waveform mixed;
  Waveform scaled_noise;
  double gain = 0.0;
};

// Tiles/crops `noise` from noise_offset to the clean length, scales it so the
// sample-energy SNR equals snr_db exactly, and returns mixed = clean + noise.
MixResult mix_at_snr(const Waveform &clean, const Waveform &noise, double snr_db,
                     int64_t noise_offset);

// One mixture per clean WAV in clean_dir, noise drawn from noise_dir. Mixed
// WAVs land in out_dir, the manifest in out_dir/manifest.jsonl. Identical
// (spec.seed, input listing) give bit-identical outputs. Unreadable inputs are
// skipped with a warning on stderr.
std::vector<Manifest> simulate_corpus(const std::string &clean_dir, const std::string &noise_dir,
                                      const MixSpec &spec, const std::string &out_dir);

// Magnitudes of mixed, clean and scaled noise under one STFT setting. The
// float-domain mixture is recomputed from the manifest (clean + g * noise), so
// the additive waveform decomposition is exact; mixed_path is only the PCM16
// export.
struct MagnitudeTriplet {
  MagnitudeSpectrogram y;  // mixed
  MagnitudeSpectrogram s;  // clean
  MagnitudeSpectrogram n;  // scaled noise
  size_t sample_count = 0;  // clean waveform length; 0 in synthetic mode
};

MagnitudeTriplet magnitude_triplet(const Manifest &row, int window_len, int hop_len);

// Synthetic magnitude mode: Y := S + N constructed directly, so the additive
// spectrogram relation holds exactly entrywise.
MagnitudeTriplet synthetic_triplet(const MagnitudeSpectrogram &s, const MagnitudeSpectrogram &n);

// ||Y - (S + N)|| / ||Y||; zero in synthetic mode, a phase-mismatch
// diagnostic in waveform mode.
double additivity_gap(const MagnitudeTriplet &t);

void write_manifest(const std::string &path, const std::vector<Manifest> &rows);
std::vector<Manifest> read_manifest(const std::string &path);

}  // namespace dsrn
