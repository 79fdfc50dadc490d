// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsrn/dsrnet.hpp"
#include "dsrn/enhance.hpp"
#include "dsrn/loss.hpp"
#include "dsrn/mixer.hpp"

namespace dsrn {

enum class TrainRegime { Se, Frozen, Joint };
enum class OptimizerKind { Sgd, Adam };

struct TrainConfig {
  double learning_rate = 0.001;
  int64_t warmup_steps = 30000;
  int epochs = 1;
  int batch_frames = 64;
  uint64_t seed = 0;
  TrainRegime regime = TrainRegime::Joint;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip_norm = 5.0;

  void validate() const;
};

struct TraceRow {
  int64_t step = 0;
  double l_enh = 0.0;
  double l_refine = 0.0;
  double lambda = 0.5;
  double e_s_tilde = 0.0;
  double e_n_tilde = 0.0;
  double l_total = 0.0;
};

struct TrainReport {
  std::vector<TraceRow> trace;
  double wall_seconds = 0.0;
  std::string checkpoint_path;  // filled by callers that persist the result
};

void write_trace_csv(const std::string &path, const std::vector<TraceRow> &trace);

// In-memory corpus of magnitude triplets under one STFT setting.
struct UttData {
  std::string utt_id;
  double snr_db = 0.0;
  Mat y, s, n;
  size_t sample_count = 0;  // original waveform length (waveform-mode corpora)
};

struct Corpus {
  std::vector<UttData> utts;
  SpectrogramMeta meta;
};

Corpus load_corpus(const std::vector<Manifest> &rows, int window_len, int hop_len);

// Noam-style warmup: lr * min(step / warmup, sqrt(warmup / step)); peak after
// warmup_steps.
double lr_schedule(int64_t step, const TrainConfig &cfg);

// Minimizes the enhancement loss over batches of frames. Batches are
// contiguous frame chunks from one utterance at a time; utterance order is
// reshuffled per epoch from the seed.
TrainReport train_se(const Corpus &corpus, const TrainConfig &cfg, MaskEstimatorParams &se);

// Joint objective: downstream(+proxy) + alpha * L_enh + beta * L_refine.
// regime Frozen updates the refine network only; Joint also flows gradients
// through the mask estimator. Pass enable_dsrnet=false to train the
// enhancement front-end against the joint objective without refinement.
TrainReport train_joint(const Corpus &corpus, const TrainConfig &cfg,
                        const JointLossConfig &loss_cfg, MaskEstimatorParams &se,
                        DsrnetParams &dsr, bool enable_dsrnet = true);

struct SweepRow {
  double alpha = 0.0;
  double final_proxy_loss = 0.0;
};

// Trains one joint model per alpha from the given initial parameters (copied
// per run, shared seed) and reports the held-out feature-proxy loss.
std::vector<SweepRow> sweep_alpha(const std::vector<double> &values, const Corpus &train_corpus,
                                  const Corpus &heldout, const TrainConfig &cfg,
                                  const JointLossConfig &loss_cfg,
                                  const MaskEstimatorParams &se_init,
                                  const DsrnetParams &dsr_init);

void write_sweep_csv(const std::string &path, const std::vector<SweepRow> &rows);

// Finite-difference gradient verification on tiny instances.
struct GradCheckBlock {
  std::string name;
  double rel_err = 0.0;
};

struct GradCheckReport {
  std::string component;
  std::vector<GradCheckBlock> blocks;

  double max_rel_err() const;
};

GradCheckReport gradcheck_mlp(uint64_t seed);
GradCheckReport gradcheck_lstm(uint64_t seed);       // hidden 3, T = 4
GradCheckReport gradcheck_dsrnet(uint64_t seed);     // F = 4, T = 3
GradCheckReport gradcheck_refine_loss(uint64_t seed);
GradCheckReport gradcheck_end_to_end(uint64_t seed);
std::vector<GradCheckReport> gradcheck_component(const std::string &component, uint64_t seed);

}  // namespace dsrn
