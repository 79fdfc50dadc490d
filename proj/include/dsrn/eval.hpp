// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

#include "dsrn/dsrnet.hpp"
#include "dsrn/enhance.hpp"
#include "dsrn/mixer.hpp"
#include "dsrn/train.hpp"

namespace dsrn {

// Scale-invariant SNR: the estimate is projected onto the reference, the
// ratio of target to residual energy is reported in dB, capped at 100.
double si_snr_db(const Waveform &estimate, const Waveform &reference);

struct EvalRow {
  std::string utt_id;
  double snr_db = 0.0;
  double spectral_mse_enhanced = 0.0;
  double spectral_mse_refined = 0.0;
  double e_s_abs = 0.0;
  double e_n_abs = 0.0;
  double si_snr_noisy = 0.0;
  double si_snr_enhanced = 0.0;
  double si_snr_refined = 0.0;
};

struct SnrGroup {
  double snr_db = 0.0;
  int count = 0;
  double mean_mse_enhanced = 0.0;
  double mean_mse_refined = 0.0;
  double refined_minus_enhanced = 0.0;
  double mean_si_snr_noisy = 0.0;
  double mean_si_snr_enhanced = 0.0;
  double mean_si_snr_refined = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;     // ordered by utt_id
  std::vector<SnrGroup> groups;  // ordered by snr_db
};

// Full pipeline per utterance: mask, refine, error diagnostics, and SI-SNR on
// waveforms resynthesized with the noisy phase (refined magnitudes clamped at
// zero for synthesis). An Oracle-variant estimator uses the ideal ratio mask.
EvalReport evaluate(const std::vector<Manifest> &rows, const MaskEstimatorParams &se,
                    const DsrnetParams &dsr, int window_len, int hop_len, int threads = 1);

void write_eval_csv(const std::string &path, const EvalReport &report);

// Spectral-only metrics over an in-memory corpus (no waveform synthesis).
struct TripletMetrics {
  double mean_mse_enhanced = 0.0;
  double mean_mse_refined = 0.0;
};

TripletMetrics evaluate_triplets(const Corpus &corpus, const MaskEstimatorParams &se,
                                 const DsrnetParams &dsr, bool enable_dsrnet = true);

}  // namespace dsrn
