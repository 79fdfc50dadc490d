// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsrn/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <thread>

#include "dsrn/csv.hpp"
#include "dsrn/loss.hpp"
#include "dsrn/stft.hpp"
#include "dsrn/wav.hpp"

namespace dsrn {

namespace {

constexpr double kSiSnrCapDb = 100.0;

void parallel_for(size_t n, int threads, const std::function<void(size_t)> &fn) {
  if (threads <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<size_t> next{0};
  const int workers = std::min<int>(threads, static_cast<int>(n));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&]() {
      for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (std::thread &t : pool) t.join();
}

Waveform synthesize(const Mat &mag, const Mat &noisy_phase, const SpectrogramMeta &meta,
                    size_t original_len) {
  MagnitudeSpectrogram m;
  m.frames = mag.cwiseMax(0.0);  // clamp only at the synthesis boundary
  m.meta = meta;
  return istft_trimmed(reconstruct(m, noisy_phase), original_len);
}

}  // namespace

double si_snr_db(const Waveform &estimate, const Waveform &reference) {
  if (estimate.samples.size() != reference.samples.size())
    throw std::invalid_argument("si_snr: length mismatch");
  double rr = 0.0, er = 0.0;
  for (size_t i = 0; i < reference.samples.size(); ++i) {
    rr += reference.samples[i] * reference.samples[i];
    er += estimate.samples[i] * reference.samples[i];
  }
  if (rr <= 0.0) throw std::invalid_argument("si_snr: zero reference");
  const double scale = er / rr;
  double target_sq = 0.0, err_sq = 0.0;
  for (size_t i = 0; i < reference.samples.size(); ++i) {
    const double t = scale * reference.samples[i];
    const double e = estimate.samples[i] - t;
    target_sq += t * t;
    err_sq += e * e;
  }
  if (err_sq <= 0.0 || target_sq <= 0.0) {
    // degenerate projections (perfect match or orthogonal estimate)
    return err_sq <= 0.0 ? kSiSnrCapDb : -kSiSnrCapDb;
  }
  return std::min(kSiSnrCapDb, 10.0 * std::log10(target_sq / err_sq));
}

EvalReport evaluate(const std::vector<Manifest> &rows, const MaskEstimatorParams &se,
                    const DsrnetParams &dsr, int window_len, int hop_len, int threads) {
  if (rows.empty()) throw std::invalid_argument("evaluate: empty manifest");
  EvalReport report;
  report.rows.resize(rows.size());

  parallel_for(rows.size(), threads, [&](size_t i) {
    const Manifest &row = rows[i];
    Waveform clean = read_wav(row.clean_path);
    Waveform noise = read_wav(row.noise_path);
    MixResult mix = mix_at_snr(clean, noise, row.snr_db, row.noise_offset);

    ComplexSpectrogram yc = stft(mix.mixed, window_len, hop_len);
    MagnitudeSpectrogram y = magnitude(yc);
    Mat noisy_phase = phase(yc);
    Mat s = magnitude(stft(clean, window_len, hop_len)).frames;
    Mat n = magnitude(stft(mix.scaled_noise, window_len, hop_len)).frames;

    Mat mask = se.variant == EstimatorVariant::Oracle ? oracle_mask(s, n)
                                                      : estimate_mask(se, y.frames).mask;
    EnhancedPair pair = apply_mask(mask, y.frames);
    DsrnetForwardResult fwd = dsrnet_forward(dsr, pair);
    ErrorDecomposition ed = error_decomposition(pair, s, n);

    EvalRow &out = report.rows[i];
    out.utt_id = row.utt_id;
    out.snr_db = row.snr_db;
    out.spectral_mse_enhanced = mse(pair.s_hat, s);
    out.spectral_mse_refined = mse(fwd.refined.s_tilde, s);
    out.e_s_abs = ed.e_s_abs();
    out.e_n_abs = ed.e_n_abs();

    const size_t len = clean.samples.size();
    out.si_snr_noisy = si_snr_db(mix.mixed, clean);
    out.si_snr_enhanced = si_snr_db(synthesize(pair.s_hat, noisy_phase, y.meta, len), clean);
    out.si_snr_refined =
        si_snr_db(synthesize(fwd.refined.s_tilde, noisy_phase, y.meta, len), clean);
  });

  std::sort(report.rows.begin(), report.rows.end(),
            [](const EvalRow &a, const EvalRow &b) { return a.utt_id < b.utt_id; });

  std::map<double, SnrGroup> groups;
  for (const EvalRow &r : report.rows) {
    SnrGroup &g = groups[r.snr_db];
    g.snr_db = r.snr_db;
    g.count += 1;
    g.mean_mse_enhanced += r.spectral_mse_enhanced;
    g.mean_mse_refined += r.spectral_mse_refined;
    g.mean_si_snr_noisy += r.si_snr_noisy;
    g.mean_si_snr_enhanced += r.si_snr_enhanced;
    g.mean_si_snr_refined += r.si_snr_refined;
  }
  for (auto &[snr, g] : groups) {
    g.mean_mse_enhanced /= g.count;
    g.mean_mse_refined /= g.count;
    g.refined_minus_enhanced = g.mean_mse_refined - g.mean_mse_enhanced;
    g.mean_si_snr_noisy /= g.count;
    g.mean_si_snr_enhanced /= g.count;
    g.mean_si_snr_refined /= g.count;
    report.groups.push_back(g);
  }
  return report;
}

void write_eval_csv(const std::string &path, const EvalReport &report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << "utt_id,snr_db,spectral_mse_enhanced,spectral_mse_refined,e_s_abs,e_n_abs,"
         "si_snr_noisy,si_snr_enhanced,si_snr_refined\n";
  for (const EvalRow &r : report.rows)
    out << r.utt_id << ',' << fmt_double(r.snr_db) << ',' << fmt_double(r.spectral_mse_enhanced)
        << ',' << fmt_double(r.spectral_mse_refined) << ',' << fmt_double(r.e_s_abs) << ','
        << fmt_double(r.e_n_abs) << ',' << fmt_double(r.si_snr_noisy) << ','
        << fmt_double(r.si_snr_enhanced) << ',' << fmt_double(r.si_snr_refined) << "\n";
}

TripletMetrics evaluate_triplets(const Corpus &corpus, const MaskEstimatorParams &se,
                                 const DsrnetParams &dsr, bool enable_dsrnet) {
  if (corpus.utts.empty()) throw std::invalid_argument("evaluate_triplets: empty corpus");
  TripletMetrics m;
  for (const UttData &utt : corpus.utts) {
    Mat mask = se.variant == EstimatorVariant::Oracle ? oracle_mask(utt.s, utt.n)
                                                      : estimate_mask(se, utt.y).mask;
    EnhancedPair pair = apply_mask(mask, utt.y);
    m.mean_mse_enhanced += mse(pair.s_hat, utt.s);
    if (enable_dsrnet) {
      DsrnetForwardResult fwd = dsrnet_forward(dsr, pair);
      m.mean_mse_refined += mse(fwd.refined.s_tilde, utt.s);
    } else {
      m.mean_mse_refined += mse(pair.s_hat, utt.s);
    }
  }
  const double inv = 1.0 / static_cast<double>(corpus.utts.size());
  m.mean_mse_enhanced *= inv;
  m.mean_mse_refined *= inv;
  return m;
}

}  // namespace dsrn
