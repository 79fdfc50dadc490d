// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsrn/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>

#include "dsrn/csv.hpp"
#include "dsrn/optimizer.hpp"

namespace dsrn {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<size_t> shuffled_indices(size_t n, Rng &rng) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), size_t{0});
  for (size_t i = n; i-- > 1;) {
    const size_t j = rng.uniform_int(i + 1);
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

struct Chunk {
  size_t utt = 0;
  Eigen::Index begin = 0;
  Eigen::Index len = 0;
};

// One epoch's batch order: shuffled utterances, contiguous frame chunks
// within each utterance. Recurrent state never crosses chunk boundaries.
std::vector<Chunk> epoch_chunks(const Corpus &corpus, int batch_frames, Rng &rng) {
  std::vector<Chunk> chunks;
  for (size_t u : shuffled_indices(corpus.utts.size(), rng)) {
    const Eigen::Index frames = corpus.utts[u].y.rows();
    for (Eigen::Index b = 0; b < frames; b += batch_frames)
      chunks.push_back({u, b, std::min<Eigen::Index>(batch_frames, frames - b)});
  }
  return chunks;
}

struct JointBatchResult {
  double l_enh = 0.0, l_refine = 0.0, l_ds = 0.0, l_total = 0.0;
  double lambda = 0.5, e_s_tilde = 0.0, e_n_tilde = 0.0;
  MaskEstimatorParams se_grads;
  DsrnetParams dsr_grads;
  bool has_se_grads = false, has_dsr_grads = false;
};

// Shared forward/backward for one batch of the joint objective. This is the
// exact path the end-to-end gradient check verifies.
JointBatchResult joint_forward_backward(const Mat &y, const Mat &s, const Mat &n,
                                        const MaskEstimatorParams &se, const DsrnetParams *dsr,
                                        const JointLossConfig &cfg, const Mat *proxy_fb,
                                        bool want_se_grads) {
  JointBatchResult r;
  MaskEstimate est = estimate_mask(se, y);
  EnhancedPair pair = apply_mask(est.mask, y);
  r.l_enh = enh_loss(pair.s_hat, s);

  DsrnetForwardResult fwd;
  RefinedPair refined;
  if (dsr) {
    fwd = dsrnet_forward(*dsr, pair);
    refined = fwd.refined;
  } else {
    refined.s_tilde = pair.s_hat;
    refined.n_tilde = pair.n_hat;
  }

  RefineLossResult rl = refine_loss(refined, s, n, cfg);
  r.l_refine = rl.loss;
  r.lambda = rl.errors.lambda;
  r.e_s_tilde = rl.errors.e_s_tilde;
  r.e_n_tilde = rl.errors.e_n_tilde;

  FeatureProxyResult proxy;
  if (cfg.downstream_mode == DownstreamMode::FeatureProxy) {
    if (!proxy_fb) throw std::invalid_argument("joint training: feature proxy needs a filterbank");
    proxy = feature_proxy_loss(refined.s_tilde, s, *proxy_fb, cfg.proxy_mel.floor_value);
    r.l_ds = proxy.loss;
  }
  if (std::isfinite(r.l_ds) && std::isfinite(r.l_enh) && std::isfinite(r.l_refine))
    r.l_total = joint_loss(r.l_ds, r.l_enh, r.l_refine, cfg);
  else
    r.l_total = std::numeric_limits<double>::quiet_NaN();  // divergence signal

  Mat d_s_tilde = cfg.beta * rl.d_s_tilde;
  Mat d_n_tilde = cfg.beta * rl.d_n_tilde;
  if (cfg.downstream_mode == DownstreamMode::FeatureProxy) d_s_tilde += proxy.d_s_tilde;

  Mat d_s_hat, d_n_hat;
  if (dsr) {
    DsrnetBackwardResult bk = dsrnet_backward(*dsr, fwd.cache, d_s_tilde, d_n_tilde);
    r.dsr_grads = std::move(bk.grads);
    r.has_dsr_grads = true;
    d_s_hat = std::move(bk.d_s_hat);
    d_n_hat = std::move(bk.d_n_hat);
  } else {
    d_s_hat = std::move(d_s_tilde);
    d_n_hat = std::move(d_n_tilde);
  }

  if (want_se_grads) {
    // n_hat = y - s_hat folds the noise-branch gradient into s_hat
    Mat d_s_hat_total = d_s_hat - d_n_hat + cfg.alpha * enh_loss_backward(pair.s_hat, s);
    Mat d_mask = d_s_hat_total.cwiseProduct(y);
    r.se_grads = mask_estimator_backward(se, est.cache, d_mask);
    r.has_se_grads = true;
  }
  return r;
}

void check_not_diverged(double loss, int64_t step) {
  if (!std::isfinite(loss))
    throw std::runtime_error("training diverged at step " + std::to_string(step));
}

double clip_factor(double sq_norm, double clip) {
  const double norm = std::sqrt(sq_norm);
  return norm > clip ? clip / norm : 1.0;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train config: learning_rate must be > 0");
  if (warmup_steps < 1) throw std::invalid_argument("train config: warmup_steps must be >= 1");
  if (epochs < 0) throw std::invalid_argument("train config: epochs must be >= 0");
  if (batch_frames < 1) throw std::invalid_argument("train config: batch_frames must be >= 1");
  if (!(grad_clip_norm > 0.0)) throw std::invalid_argument("train config: grad_clip_norm must be > 0");
}

double lr_schedule(int64_t step, const TrainConfig &cfg) {
  if (step < 1) throw std::invalid_argument("lr_schedule: step must be >= 1");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(cfg.warmup_steps);
  return cfg.learning_rate * std::min(s / w, std::sqrt(w / s));
}

Corpus load_corpus(const std::vector<Manifest> &rows, int window_len, int hop_len) {
  if (rows.empty()) throw std::invalid_argument("load_corpus: empty manifest");
  Corpus c;
  for (const Manifest &row : rows) {
    MagnitudeTriplet t = magnitude_triplet(row, window_len, hop_len);
    c.meta = t.y.meta;
    c.utts.push_back({row.utt_id, row.snr_db, std::move(t.y.frames), std::move(t.s.frames),
                      std::move(t.n.frames), t.sample_count});
  }
  return c;
}

void write_trace_csv(const std::string &path, const std::vector<TraceRow> &trace) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write trace: " + path);
  out << "step,l_enh,l_refine,lambda,e_s_tilde,e_n_tilde,l_total\n";
  for (const TraceRow &r : trace)
    out << r.step << ',' << fmt_double(r.l_enh) << ',' << fmt_double(r.l_refine) << ','
        << fmt_double(r.lambda) << ',' << fmt_double(r.e_s_tilde) << ','
        << fmt_double(r.e_n_tilde) << ',' << fmt_double(r.l_total) << "\n";
}

TrainReport train_se(const Corpus &corpus, const TrainConfig &cfg, MaskEstimatorParams &se) {
  cfg.validate();
  if (corpus.utts.empty()) throw std::invalid_argument("train_se: empty corpus");
  if (se.variant == EstimatorVariant::Oracle)
    throw std::invalid_argument("train_se: oracle estimator has no trainable parameters");

  const auto t0 = Clock::now();
  TrainReport report;
  Rng order_rng = Rng(cfg.seed).fork(1);
  AdamState<MaskEstimatorParams> adam(se);
  int64_t step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const Chunk &ch : epoch_chunks(corpus, cfg.batch_frames, order_rng)) {
      const UttData &utt = corpus.utts[ch.utt];
      const Mat y = utt.y.middleRows(ch.begin, ch.len);
      const Mat s = utt.s.middleRows(ch.begin, ch.len);
      ++step;

      MaskEstimate est = estimate_mask(se, y);
      EnhancedPair pair = apply_mask(est.mask, y);
      const double loss = enh_loss(pair.s_hat, s);
      check_not_diverged(loss, step);

      Mat d_mask = enh_loss_backward(pair.s_hat, s).cwiseProduct(y);
      MaskEstimatorParams grads = mask_estimator_backward(se, est.cache, d_mask);
      auto refs = tensor_refs(grads);
      const double factor = clip_factor(tensors_sq_norm(refs), cfg.grad_clip_norm);
      if (factor != 1.0) tensors_scale(refs, factor);

      const double lr = lr_schedule(step, cfg);
      if (cfg.optimizer == OptimizerKind::Adam)
        adam_step(se, grads, adam, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
      else
        sgd_step(se, grads, lr);

      report.trace.push_back({step, loss, 0.0, 0.5, 0.0, 0.0, loss});
    }
  }
  report.wall_seconds = seconds_since(t0);
  return report;
}

TrainReport train_joint(const Corpus &corpus, const TrainConfig &cfg,
                        const JointLossConfig &loss_cfg, MaskEstimatorParams &se,
                        DsrnetParams &dsr, bool enable_dsrnet) {
  cfg.validate();
  loss_cfg.validate();
  if (corpus.utts.empty()) throw std::invalid_argument("train_joint: empty corpus");
  if (cfg.regime == TrainRegime::Se)
    throw std::invalid_argument("train_joint: regime must be frozen or joint");
  const bool update_se = cfg.regime == TrainRegime::Joint;

  Mat proxy_fb;
  if (loss_cfg.downstream_mode == DownstreamMode::FeatureProxy)
    proxy_fb = mel_filterbank(loss_cfg.proxy_mel, static_cast<int>(corpus.utts[0].y.cols()),
                              corpus.meta.window_len, corpus.meta.sample_rate_hz);

  const auto t0 = Clock::now();
  TrainReport report;
  Rng order_rng = Rng(cfg.seed).fork(1);
  AdamState<MaskEstimatorParams> se_adam(se);
  AdamState<DsrnetParams> dsr_adam(dsr);
  int64_t step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const Chunk &ch : epoch_chunks(corpus, cfg.batch_frames, order_rng)) {
      const UttData &utt = corpus.utts[ch.utt];
      const Mat y = utt.y.middleRows(ch.begin, ch.len);
      const Mat s = utt.s.middleRows(ch.begin, ch.len);
      const Mat n = utt.n.middleRows(ch.begin, ch.len);
      ++step;

      JointBatchResult b =
          joint_forward_backward(y, s, n, se, enable_dsrnet ? &dsr : nullptr, loss_cfg,
                                 proxy_fb.size() > 0 ? &proxy_fb : nullptr, update_se);
      check_not_diverged(b.l_total, step);

      double sq = 0.0;
      if (b.has_se_grads) sq += tensors_sq_norm(tensor_refs(b.se_grads));
      if (b.has_dsr_grads) sq += tensors_sq_norm(tensor_refs(b.dsr_grads));
      const double factor = clip_factor(sq, cfg.grad_clip_norm);
      if (factor != 1.0) {
        if (b.has_se_grads) tensors_scale(tensor_refs(b.se_grads), factor);
        if (b.has_dsr_grads) tensors_scale(tensor_refs(b.dsr_grads), factor);
      }

      const double lr = lr_schedule(step, cfg);
      if (b.has_se_grads) {
        if (cfg.optimizer == OptimizerKind::Adam)
          adam_step(se, b.se_grads, se_adam, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
        else
          sgd_step(se, b.se_grads, lr);
      }
      if (b.has_dsr_grads) {
        if (cfg.optimizer == OptimizerKind::Adam)
          adam_step(dsr, b.dsr_grads, dsr_adam, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
        else
          sgd_step(dsr, b.dsr_grads, lr);
      }

      report.trace.push_back(
          {step, b.l_enh, b.l_refine, b.lambda, b.e_s_tilde, b.e_n_tilde, b.l_total});
    }
  }
  report.wall_seconds = seconds_since(t0);
  return report;
}

std::vector<SweepRow> sweep_alpha(const std::vector<double> &values, const Corpus &train_corpus,
                                  const Corpus &heldout, const TrainConfig &cfg,
                                  const JointLossConfig &loss_cfg,
                                  const MaskEstimatorParams &se_init,
                                  const DsrnetParams &dsr_init) {
  if (values.empty()) throw std::invalid_argument("sweep_alpha: no values");
  Mat fb = mel_filterbank(loss_cfg.proxy_mel, static_cast<int>(heldout.utts[0].y.cols()),
                          heldout.meta.window_len, heldout.meta.sample_rate_hz);

  std::vector<SweepRow> rows;
  for (double alpha : values) {
    JointLossConfig run_cfg = loss_cfg;
    run_cfg.alpha = alpha;
    MaskEstimatorParams se = se_init;
    DsrnetParams dsr = dsr_init;
    train_joint(train_corpus, cfg, run_cfg, se, dsr, true);

    double total = 0.0;
    for (const UttData &utt : heldout.utts) {
      MaskEstimate est = estimate_mask(se, utt.y);
      EnhancedPair pair = apply_mask(est.mask, utt.y);
      DsrnetForwardResult fwd = dsrnet_forward(dsr, pair);
      total += feature_proxy_loss(fwd.refined.s_tilde, utt.s, fb,
                                  run_cfg.proxy_mel.floor_value)
                   .loss;
    }
    rows.push_back({alpha, total / static_cast<double>(heldout.utts.size())});
  }
  return rows;
}

void write_sweep_csv(const std::string &path, const std::vector<SweepRow> &rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write sweep table: " + path);
  out << "alpha,final_proxy_loss\n";
  for (const SweepRow &r : rows)
    out << fmt_double(r.alpha) << ',' << fmt_double(r.final_proxy_loss) << "\n";
}

// ---------------------------------------------------------------------------
// Finite-difference gradient checks
// ---------------------------------------------------------------------------

namespace {

constexpr double kFdStep = 1e-5;

double block_rel_err(double diff_sq, double ana_sq, double num_sq) {
  const double denom = std::max(std::sqrt(ana_sq), std::sqrt(num_sq));
  return denom > 1e-12 ? std::sqrt(diff_sq) / denom : std::sqrt(diff_sq);
}

// Central differences over every element of every tensor in `params`.
template <class P>
void fd_check_params(P &params, const P &analytic, const std::function<double()> &loss_fn,
                     const std::string &prefix, std::vector<GradCheckBlock> &out) {
  auto pr = tensor_refs(params);
  auto ar = tensor_refs(analytic);
  for (size_t b = 0; b < pr.size(); ++b) {
    double diff_sq = 0.0, ana_sq = 0.0, num_sq = 0.0;
    for (Eigen::Index i = 0; i < pr[b].size(); ++i) {
      const double saved = pr[b].data[i];
      pr[b].data[i] = saved + kFdStep;
      const double fp = loss_fn();
      pr[b].data[i] = saved - kFdStep;
      const double fm = loss_fn();
      pr[b].data[i] = saved;
      const double fd = (fp - fm) / (2.0 * kFdStep);
      const double an = ar[b].data[i];
      diff_sq += (fd - an) * (fd - an);
      ana_sq += an * an;
      num_sq += fd * fd;
    }
    out.push_back({prefix + pr[b].name, block_rel_err(diff_sq, ana_sq, num_sq)});
  }
}

void fd_check_mat(Mat &m, const Mat &analytic, const std::function<double()> &loss_fn,
                  const std::string &name, std::vector<GradCheckBlock> &out) {
  double diff_sq = 0.0, ana_sq = 0.0, num_sq = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double saved = m.data()[i];
    m.data()[i] = saved + kFdStep;
    const double fp = loss_fn();
    m.data()[i] = saved - kFdStep;
    const double fm = loss_fn();
    m.data()[i] = saved;
    const double fd = (fp - fm) / (2.0 * kFdStep);
    const double an = analytic.data()[i];
    diff_sq += (fd - an) * (fd - an);
    ana_sq += an * an;
    num_sq += fd * fd;
  }
  out.push_back({name, block_rel_err(diff_sq, ana_sq, num_sq)});
}

Mat positive_mat(Eigen::Index rows, Eigen::Index cols, Rng &rng, double lo = 0.5,
                 double hi = 2.0) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

GradCheckReport gradcheck_estimator(MaskEstimatorParams params, const std::string &component,
                                    uint64_t seed) {
  Rng rng(seed);
  estimator_default_init(params, rng);
  const Eigen::Index frames = 4;
  Mat s = positive_mat(frames, params.input_dim, rng);
  Mat n = positive_mat(frames, params.input_dim, rng);
  Mat y = s + n;

  auto loss_fn = [&]() {
    MaskEstimate est = estimate_mask(params, y);
    return enh_loss(apply_mask(est.mask, y).s_hat, s);
  };
  MaskEstimate est = estimate_mask(params, y);
  EnhancedPair pair = apply_mask(est.mask, y);
  Mat d_mask = enh_loss_backward(pair.s_hat, s).cwiseProduct(y);
  MaskEstimatorParams analytic = mask_estimator_backward(params, est.cache, d_mask);

  GradCheckReport report{component, {}};
  fd_check_params(params, analytic, loss_fn, "", report.blocks);
  return report;
}

}  // namespace

double GradCheckReport::max_rel_err() const {
  double m = 0.0;
  for (const GradCheckBlock &b : blocks) m = std::max(m, b.rel_err);
  return m;
}

GradCheckReport gradcheck_mlp(uint64_t seed) {
  return gradcheck_estimator(MaskEstimatorParams::mlp(6, {4}, 6), "mlp", seed);
}

GradCheckReport gradcheck_lstm(uint64_t seed) {
  return gradcheck_estimator(MaskEstimatorParams::lstm(5, 3, 2, 5), "lstm", seed);
}

GradCheckReport gradcheck_dsrnet(uint64_t seed) {
  Rng rng(seed);
  const int dim = 4;
  const Eigen::Index frames = 3;
  DsrnetParams params = DsrnetParams::make(dim);
  dsrnet_random_init(params, rng);

  EnhancedPair pair{positive_mat(frames, dim, rng), positive_mat(frames, dim, rng)};
  Mat s = positive_mat(frames, dim, rng);
  Mat n = positive_mat(frames, dim, rng);

  auto loss_of = [&](const RefinedPair &r) { return mse(r.s_tilde, s) + mse(r.n_tilde, n); };
  auto loss_fn = [&]() { return loss_of(dsrnet_forward(params, pair).refined); };

  DsrnetForwardResult fwd = dsrnet_forward(params, pair);
  const double inv = 2.0 / static_cast<double>(s.size());
  Mat d_s_tilde = inv * (fwd.refined.s_tilde - s);
  Mat d_n_tilde = inv * (fwd.refined.n_tilde - n);
  DsrnetBackwardResult bk = dsrnet_backward(params, fwd.cache, d_s_tilde, d_n_tilde);

  GradCheckReport report{"dsrnet", {}};
  fd_check_params(params, bk.grads, loss_fn, "", report.blocks);
  fd_check_mat(pair.s_hat, bk.d_s_hat, loss_fn, "input.s_hat", report.blocks);
  fd_check_mat(pair.n_hat, bk.d_n_hat, loss_fn, "input.n_hat", report.blocks);
  return report;
}

GradCheckReport gradcheck_refine_loss(uint64_t seed) {
  Rng rng(seed);
  const Eigen::Index frames = 3;
  const int dim = 5;
  Mat s = positive_mat(frames, dim, rng);
  Mat n = positive_mat(frames, dim, rng);
  RefinedPair refined{s + positive_mat(frames, dim, rng, -0.5, 0.5),
                      n + positive_mat(frames, dim, rng, -0.5, 0.5)};
  JointLossConfig cfg;
  cfg.lambda_mode = LambdaMode::Fixed;
  cfg.fixed_lambda = 0.7;

  auto loss_fn = [&]() { return refine_loss(refined, s, n, cfg).loss; };
  RefineLossResult rl = refine_loss(refined, s, n, cfg);

  GradCheckReport report{"loss", {}};
  fd_check_mat(refined.s_tilde, rl.d_s_tilde, loss_fn, "d_s_tilde", report.blocks);
  fd_check_mat(refined.n_tilde, rl.d_n_tilde, loss_fn, "d_n_tilde", report.blocks);
  return report;
}

GradCheckReport gradcheck_end_to_end(uint64_t seed) {
  Rng rng(seed);
  const int dim = 5;
  const Eigen::Index frames = 4;
  MaskEstimatorParams se = MaskEstimatorParams::lstm(dim, 3, 2, dim);
  estimator_default_init(se, rng);
  DsrnetParams dsr = DsrnetParams::make(dim);
  dsrnet_random_init(dsr, rng);

  Mat s = positive_mat(frames, dim, rng);
  Mat n = positive_mat(frames, dim, rng);
  Mat y = s + n;

  GradCheckReport report{"end-to-end", {}};
  for (bool with_proxy : {false, true}) {
    JointLossConfig cfg;
    cfg.alpha = 2.0;
    cfg.beta = 3.0;
    cfg.lambda_mode = LambdaMode::Fixed;
    cfg.fixed_lambda = 0.4;
    cfg.downstream_mode = with_proxy ? DownstreamMode::FeatureProxy : DownstreamMode::None;
    cfg.proxy_mel.n_mels = 3;

    Mat fb;
    const Mat *fb_ptr = nullptr;
    if (with_proxy) {
      fb = mel_filterbank(cfg.proxy_mel, dim, 2 * (dim - 1), 16000);
      fb_ptr = &fb;
    }
    auto loss_fn = [&]() {
      return joint_forward_backward(y, s, n, se, &dsr, cfg, fb_ptr, false).l_total;
    };
    JointBatchResult b = joint_forward_backward(y, s, n, se, &dsr, cfg, fb_ptr, true);
    const std::string prefix = with_proxy ? "proxy/" : "base/";
    fd_check_params(se, b.se_grads, loss_fn, prefix + "se.", report.blocks);
    fd_check_params(dsr, b.dsr_grads, loss_fn, prefix + "dsr.", report.blocks);
  }
  return report;
}

std::vector<GradCheckReport> gradcheck_component(const std::string &component, uint64_t seed) {
  if (component == "enhance") return {gradcheck_mlp(seed), gradcheck_lstm(seed)};
  if (component == "mlp") return {gradcheck_mlp(seed)};
  if (component == "lstm") return {gradcheck_lstm(seed)};
  if (component == "dsrnet") return {gradcheck_dsrnet(seed)};
  if (component == "loss") return {gradcheck_refine_loss(seed)};
  if (component == "end-to-end") return {gradcheck_end_to_end(seed)};
  if (component == "all")
    return {gradcheck_mlp(seed), gradcheck_lstm(seed), gradcheck_dsrnet(seed),
            gradcheck_refine_loss(seed), gradcheck_end_to_end(seed)};
  throw std::invalid_argument("gradcheck: unknown component " + component);
}

}  // namespace dsrn
