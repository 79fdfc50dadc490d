// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsrn/mixer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "dsrn/rng.hpp"
#include "dsrn/stft.hpp"
#include "dsrn/wav.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace dsrn {

namespace {

double energy(const std::vector<double> &x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

std::vector<double> tile_noise(const Waveform &noise, int64_t offset, size_t len) {
  const size_t n = noise.samples.size();
  std::vector<double> out(len);
  size_t pos = static_cast<size_t>(offset % static_cast<int64_t>(n));
  for (size_t i = 0; i < len; ++i) {
    out[i] = noise.samples[pos];
    if (++pos == n) pos = 0;
  }
  return out;
}

std::vector<fs::path> list_wavs(const std::string &dir) {
  std::vector<fs::path> files;
  for (const auto &e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

MixResult mix_at_snr(const Waveform &clean, const Waveform &noise, double snr_db,
                     int64_t noise_offset) {
  validate_waveform(clean);
  validate_waveform(noise);
  if (clean.sample_rate_hz != noise.sample_rate_hz)
    throw std::runtime_error("mix_at_snr: sample-rate mismatch");
  if (!std::isfinite(snr_db)) throw std::invalid_argument("mix_at_snr: non-finite snr_db");
  if (noise_offset < 0) throw std::invalid_argument("mix_at_snr: negative noise offset");

  const double e_clean = energy(clean.samples);
  if (e_clean <= 0.0) throw std::runtime_error("mix_at_snr: zero-energy clean signal");

  std::vector<double> seg = tile_noise(noise, noise_offset, clean.samples.size());
  const double e_noise = energy(seg);
  if (e_noise <= 0.0) throw std::runtime_error("mix_at_snr: zero-energy noise segment");

  // 10*log10(e_clean / (g^2 * e_noise)) == snr_db
  const double gain = std::sqrt(e_clean / (e_noise * std::pow(10.0, snr_db / 10.0)));

  MixResult r;
  r.gain = gain;
  r.scaled_noise.sample_rate_hz = clean.sample_rate_hz;
  r.scaled_noise.samples.resize(seg.size());
  r.mixed.sample_rate_hz = clean.sample_rate_hz;
  r.mixed.samples.resize(seg.size());
  for (size_t i = 0; i < seg.size(); ++i) {
    r.scaled_noise.samples[i] = gain * seg[i];
    r.mixed.samples[i] = clean.samples[i] + r.scaled_noise.samples[i];
  }
  return r;
}

std::vector<Manifest> simulate_corpus(const std::string &clean_dir, const std::string &noise_dir,
                                      const MixSpec &spec, const std::string &out_dir) {
  const std::vector<fs::path> clean_files = list_wavs(clean_dir);
  const std::vector<fs::path> noise_files = list_wavs(noise_dir);
  if (clean_files.empty()) throw std::runtime_error("simulate_corpus: no clean WAVs in " + clean_dir);
  if (noise_files.empty()) throw std::runtime_error("simulate_corpus: no noise WAVs in " + noise_dir);
  if (spec.snr_mode == MixSpec::SnrMode::Fixed && !std::isfinite(spec.snr_db))
    throw std::invalid_argument("simulate_corpus: fixed mode requires finite snr_db");
  if (spec.snr_mode == MixSpec::SnrMode::RandomFromSet && spec.snr_set.empty())
    throw std::invalid_argument("simulate_corpus: empty SNR set");

  fs::create_directories(out_dir);
  std::vector<Manifest> rows;
  for (const fs::path &clean_path : clean_files) {
    const std::string utt_id = clean_path.stem().string();
    const uint64_t utt_seed = hash_seed(spec.seed, utt_id);
    Rng rng(utt_seed);

    // draw order: snr, noise index, noise offset
    double snr = spec.snr_db;
    if (spec.snr_mode == MixSpec::SnrMode::RandomFromSet)
      snr = spec.snr_set[rng.uniform_int(spec.snr_set.size())];
    size_t noise_idx = spec.noise_index >= 0 ? static_cast<size_t>(spec.noise_index)
                                             : rng.uniform_int(noise_files.size());
    if (noise_idx >= noise_files.size())
      throw std::invalid_argument("simulate_corpus: noise index out of range");

    Waveform clean, noise;
    try {
      clean = read_wav(clean_path.string());
      noise = read_wav(noise_files[noise_idx].string());
    } catch (const std::exception &ex) {
      std::cerr << "warning: skipping " << utt_id << ": " << ex.what() << "\n";
      continue;
    }
    const int64_t offset =
        static_cast<int64_t>(rng.uniform_int(static_cast<uint64_t>(noise.samples.size())));

    MixResult mix;
    try {
      mix = mix_at_snr(clean, noise, snr, offset);
    } catch (const std::exception &ex) {
      std::cerr << "warning: skipping " << utt_id << ": " << ex.what() << "\n";
      continue;
    }

    // peak-normalize only for the PCM16 export; analysis recomputes in float
    double peak = 0.0;
    for (double v : mix.mixed.samples) peak = std::max(peak, std::abs(v));
    const double export_gain = peak > 1.0 ? 1.0 / peak : 1.0;

    Manifest row;
    row.utt_id = utt_id;
    row.clean_path = fs::absolute(clean_path).string();
    row.noise_path = fs::absolute(noise_files[noise_idx]).string();
    row.mixed_path = (fs::path(out_dir) / (utt_id + "_mix.wav")).string();
    row.snr_db = snr;
    row.seed = utt_seed;
    row.noise_offset = offset;
    row.export_gain = export_gain;

    Waveform exported = mix.mixed;
    if (export_gain != 1.0)
      for (double &v : exported.samples) v *= export_gain;
    write_wav(row.mixed_path, exported);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("simulate_corpus: no mixtures produced");
  write_manifest((fs::path(out_dir) / "manifest.jsonl").string(), rows);
  return rows;
}

MagnitudeTriplet magnitude_triplet(const Manifest &row, int window_len, int hop_len) {
  Waveform clean = read_wav(row.clean_path);
  Waveform noise = read_wav(row.noise_path);

  MixResult mix;
  if (energy(noise.samples) <= 0.0) {
    // silent noise file: N = 0 and Y = S at any SNR
    mix.mixed = clean;
    mix.scaled_noise = clean;
    std::fill(mix.scaled_noise.samples.begin(), mix.scaled_noise.samples.end(), 0.0);
    mix.gain = 0.0;
  } else {
    mix = mix_at_snr(clean, noise, row.snr_db, row.noise_offset);
  }

  MagnitudeTriplet t;
  t.y = magnitude(stft(mix.mixed, window_len, hop_len));
  t.s = magnitude(stft(clean, window_len, hop_len));
  t.n = magnitude(stft(mix.scaled_noise, window_len, hop_len));
  t.sample_count = clean.samples.size();
  return t;
}

MagnitudeTriplet synthetic_triplet(const MagnitudeSpectrogram &s, const MagnitudeSpectrogram &n) {
  require_same_shape(s.frames, n.frames, "synthetic_triplet");
  MagnitudeTriplet t;
  t.s = s;
  t.n = n;
  t.y.meta = s.meta;
  t.y.frames = s.frames + n.frames;
  return t;
}

double additivity_gap(const MagnitudeTriplet &t) {
  const double denom = t.y.frames.norm();
  if (denom == 0.0) return 0.0;
  return (t.y.frames - (t.s.frames + t.n.frames)).norm() / denom;
}

void write_manifest(const std::string &path, const std::vector<Manifest> &rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  for (const Manifest &r : rows) {
    ordered_json j;
    j["utt_id"] = r.utt_id;
    j["clean_path"] = r.clean_path;
    j["noise_path"] = r.noise_path;
    j["mixed_path"] = r.mixed_path;
    j["snr_db"] = r.snr_db;
    j["seed"] = r.seed;
    j["noise_offset"] = r.noise_offset;
    j["export_gain"] = r.export_gain;
    out << j.dump() << "\n";
  }
}

std::vector<Manifest> read_manifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest: " + path);
  std::vector<Manifest> rows;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ordered_json j = ordered_json::parse(line, nullptr, true);
    Manifest r;
    r.utt_id = j.at("utt_id").get<std::string>();
    r.clean_path = j.at("clean_path").get<std::string>();
    r.noise_path = j.at("noise_path").get<std::string>();
    r.mixed_path = j.at("mixed_path").get<std::string>();
    r.snr_db = j.at("snr_db").get<double>();
    r.seed = j.at("seed").get<uint64_t>();
    r.noise_offset = j.at("noise_offset").get<int64_t>();
    r.export_gain = j.at("export_gain").get<double>();
    if (!std::isfinite(r.snr_db))
      throw std::runtime_error("manifest line " + std::to_string(lineno) + ": non-finite snr_db");
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace dsrn
