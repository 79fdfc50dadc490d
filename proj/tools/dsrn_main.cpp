// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// dsrn: spectrogram-domain speech enhancement and refinement toolkit.
// Subcommands: simulate, train, eval, gradcheck, sweep, spectrogram.

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dsrn/checkpoint.hpp"
#include "dsrn/csv.hpp"
#include "dsrn/eval.hpp"
#include "dsrn/image.hpp"
#include "dsrn/loss.hpp"
#include "dsrn/mixer.hpp"
#include "dsrn/stft.hpp"
#include "dsrn/train.hpp"
#include "dsrn/wav.hpp"

namespace fs = std::filesystem;
using namespace dsrn;

namespace {

std::vector<double> parse_double_list(const std::string &s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string &s) {
  std::vector<int> out;
  for (double v : parse_double_list(s)) out.push_back(static_cast<int>(v));
  return out;
}

MixSpec parse_snr(const std::string &snr, uint64_t seed, int noise_index) {
  MixSpec spec;
  spec.seed = seed;
  spec.noise_index = noise_index;
  if (snr == "random") {
    spec.snr_mode = MixSpec::SnrMode::RandomFromSet;
    return spec;
  }
  std::vector<double> values = parse_double_list(snr);
  if (values.empty()) throw CLI::ValidationError("--snr", "expected 'random', a value or a list");
  if (values.size() == 1) {
    spec.snr_mode = MixSpec::SnrMode::Fixed;
    spec.snr_db = values[0];
  } else {
    spec.snr_mode = MixSpec::SnrMode::RandomFromSet;
    spec.snr_set = values;
  }
  return spec;
}

void apply_lambda_flag(JointLossConfig &cfg, const std::string &lambda) {
  if (lambda == "dynamic") {
    cfg.lambda_mode = LambdaMode::Dynamic;
    return;
  }
  if (lambda.rfind("fixed:", 0) == 0) {
    cfg.lambda_mode = LambdaMode::Fixed;
    cfg.fixed_lambda = std::stod(lambda.substr(6));
    return;
  }
  throw CLI::ValidationError("--lambda", "expected 'dynamic' or 'fixed:<value>'");
}

void log_config(const std::string &cmd, const std::vector<std::pair<std::string, std::string>> &kv) {
  std::cerr << "config " << cmd << ":";
  for (const auto &[k, v] : kv) std::cerr << " " << k << "=" << v;
  std::cerr << "\n";
}

// Flags shared by train and sweep.
struct TrainFlags {
  std::string manifest;
  int window = 512, hop = 128;
  std::string estimator = "lstm";
  std::string hidden = "64";
  int layers = 2;
  double alpha = 300.0, beta = 100.0;
  std::string lambda = "dynamic";
  std::string downstream = "proxy";
  int n_mels = 80;
  double lr = 0.001;
  int64_t warmup = 30000;
  int epochs = 1;
  int batch_frames = 64;
  uint64_t seed = 0;
  std::string optimizer = "adam";
  std::string se_ckpt, dsrnet_ckpt;
  bool share_inner = false;
  bool diff_lambda = false;

  void add_to(CLI::App *cmd, bool manifest_required = true) {
    cmd->add_option("--manifest", manifest, "Corpus manifest (JSON Lines)")
        ->required(manifest_required);
    cmd->add_option("--window", window, "STFT window length (samples)");
    cmd->add_option("--hop", hop, "STFT hop length (samples)");
    cmd->add_option("--estimator", estimator, "Mask estimator: mlp|lstm")
        ->check(CLI::IsMember({"mlp", "lstm"}));
    cmd->add_option("--hidden", hidden, "Hidden size (comma list for mlp)");
    cmd->add_option("--layers", layers, "LSTM layer count");
    cmd->add_option("--alpha", alpha, "Enhancement loss weight");
    cmd->add_option("--beta", beta, "Refine loss weight");
    cmd->add_option("--lambda", lambda, "Refine weighting: dynamic|fixed:<v>");
    cmd->add_option("--downstream", downstream, "Downstream term: none|proxy")
        ->check(CLI::IsMember({"none", "proxy"}));
    cmd->add_option("--n-mels", n_mels, "Mel bands for the proxy features");
    cmd->add_option("--lr", lr, "Peak learning rate");
    cmd->add_option("--warmup", warmup, "Warmup steps of the Noam schedule");
    cmd->add_option("--epochs", epochs, "Training epochs");
    cmd->add_option("--batch-frames", batch_frames, "Frames per batch chunk");
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--optimizer", optimizer, "Optimizer: adam|sgd")
        ->check(CLI::IsMember({"adam", "sgd"}));
    cmd->add_option("--se-ckpt", se_ckpt, "Initial mask-estimator checkpoint");
    cmd->add_option("--dsrnet-ckpt", dsrnet_ckpt, "Initial refine-network checkpoint");
    cmd->add_flag("--share-inner", share_inner, "Share inner transforms across streams");
    cmd->add_flag("--diff-lambda", diff_lambda, "Differentiate through dynamic lambda");
  }

  TrainConfig train_config(TrainRegime regime) const {
    TrainConfig cfg;
    cfg.learning_rate = lr;
    cfg.warmup_steps = warmup;
    cfg.epochs = epochs;
    cfg.batch_frames = batch_frames;
    cfg.seed = seed;
    cfg.regime = regime;
    cfg.optimizer = optimizer == "sgd" ? OptimizerKind::Sgd : OptimizerKind::Adam;
    return cfg;
  }

  JointLossConfig loss_config() const {
    JointLossConfig cfg;
    cfg.alpha = alpha;
    cfg.beta = beta;
    apply_lambda_flag(cfg, lambda);
    cfg.downstream_mode = downstream == "proxy" ? DownstreamMode::FeatureProxy : DownstreamMode::None;
    cfg.differentiate_lambda = diff_lambda;
    cfg.proxy_mel.n_mels = n_mels;
    return cfg;
  }

  MaskEstimatorParams make_estimator(int bins, Rng &rng) const {
    if (!se_ckpt.empty()) return load_estimator_checkpoint(se_ckpt);
    MaskEstimatorParams p =
        estimator == "mlp" ? MaskEstimatorParams::mlp(bins, parse_int_list(hidden), bins)
                           : MaskEstimatorParams::lstm(bins, parse_int_list(hidden).at(0), layers, bins);
    estimator_default_init(p, rng);
    return p;
  }

  DsrnetParams make_dsrnet(int bins, Rng &rng) const {
    if (!dsrnet_ckpt.empty()) return load_dsrnet_checkpoint(dsrnet_ckpt);
    DsrnetParams p = DsrnetParams::make(bins, share_inner);
    dsrnet_default_init(p, rng);
    return p;
  }

  std::vector<std::pair<std::string, std::string>> resolved() const {
    return {{"manifest", manifest},
            {"window", std::to_string(window)},
            {"hop", std::to_string(hop)},
            {"estimator", estimator},
            {"hidden", hidden},
            {"layers", std::to_string(layers)},
            {"alpha", fmt_double(alpha)},
            {"beta", fmt_double(beta)},
            {"lambda", lambda},
            {"downstream", downstream},
            {"n_mels", std::to_string(n_mels)},
            {"lr", fmt_double(lr)},
            {"warmup", std::to_string(warmup)},
            {"epochs", std::to_string(epochs)},
            {"batch_frames", std::to_string(batch_frames)},
            {"seed", std::to_string(seed)},
            {"optimizer", optimizer},
            {"se_ckpt", se_ckpt},
            {"dsrnet_ckpt", dsrnet_ckpt},
            {"share_inner", share_inner ? "1" : "0"},
            {"diff_lambda", diff_lambda ? "1" : "0"}};
  }
};

int run_simulate(const std::string &clean_dir, const std::string &noise_dir,
                 const std::string &out_dir, const std::string &snr, uint64_t seed,
                 int noise_index) {
  log_config("simulate", {{"clean_dir", clean_dir},
                          {"noise_dir", noise_dir},
                          {"out_dir", out_dir},
                          {"snr", snr},
                          {"seed", std::to_string(seed)},
                          {"noise_index", std::to_string(noise_index)}});
  MixSpec spec = parse_snr(snr, seed, noise_index);
  std::vector<Manifest> rows = simulate_corpus(clean_dir, noise_dir, spec, out_dir);
  const std::string manifest_path = (fs::path(out_dir) / "manifest.jsonl").string();
  std::cerr << "simulated " << rows.size() << " mixtures\n";
  std::cout << manifest_path << "\n";
  return 0;
}

int run_train(const TrainFlags &flags, const std::string &regime, const std::string &ckpt_out,
              const std::string &dsrnet_ckpt_out, const std::string &trace_out) {
  auto kv = flags.resolved();
  kv.emplace_back("regime", regime);
  kv.emplace_back("ckpt_out", ckpt_out);
  kv.emplace_back("dsrnet_ckpt_out", dsrnet_ckpt_out);
  kv.emplace_back("trace_out", trace_out);
  log_config("train", kv);

  Corpus corpus = load_corpus(read_manifest(flags.manifest), flags.window, flags.hop);
  const int bins = static_cast<int>(corpus.utts[0].y.cols());
  Rng rng = Rng(flags.seed).fork(7);
  MaskEstimatorParams se = flags.make_estimator(bins, rng);
  TrainReport report;

  if (regime == "se") {
    report = train_se(corpus, flags.train_config(TrainRegime::Se), se);
    if (ckpt_out.empty()) throw std::runtime_error("train: --ckpt-out is required");
    save_estimator_checkpoint(ckpt_out, se, flags.seed,
                              static_cast<int64_t>(report.trace.size()));
    report.checkpoint_path = ckpt_out;
  } else {
    DsrnetParams dsr = flags.make_dsrnet(bins, rng);
    const TrainRegime r = regime == "frozen" ? TrainRegime::Frozen : TrainRegime::Joint;
    report = train_joint(corpus, flags.train_config(r), flags.loss_config(), se, dsr);
    if (dsrnet_ckpt_out.empty()) throw std::runtime_error("train: --dsrnet-ckpt-out is required");
    save_dsrnet_checkpoint(dsrnet_ckpt_out, dsr, flags.seed,
                           static_cast<int64_t>(report.trace.size()));
    if (!ckpt_out.empty())
      save_estimator_checkpoint(ckpt_out, se, flags.seed,
                                static_cast<int64_t>(report.trace.size()));
    report.checkpoint_path = dsrnet_ckpt_out;
  }
  if (!trace_out.empty()) write_trace_csv(trace_out, report.trace);

  double final_loss = report.trace.empty() ? 0.0 : report.trace.back().l_total;
  std::cerr << "trained " << report.trace.size() << " steps in " << report.wall_seconds
            << " s, final loss " << final_loss << "\n";
  std::cout << report.checkpoint_path << "\n";
  return 0;
}

int run_eval(const std::string &manifest, const std::string &se_ckpt,
             const std::string &dsrnet_ckpt, bool use_oracle, const std::string &report_out,
             int window, int hop, int threads) {
  log_config("eval", {{"manifest", manifest},
                      {"se_ckpt", se_ckpt},
                      {"dsrnet_ckpt", dsrnet_ckpt},
                      {"oracle", use_oracle ? "1" : "0"},
                      {"report_out", report_out},
                      {"window", std::to_string(window)},
                      {"hop", std::to_string(hop)},
                      {"threads", std::to_string(threads)}});
  std::vector<Manifest> rows = read_manifest(manifest);
  const int bins = window / 2 + 1;

  MaskEstimatorParams se = use_oracle ? MaskEstimatorParams::oracle(bins)
                                      : load_estimator_checkpoint(se_ckpt);
  DsrnetParams dsr =
      dsrnet_ckpt.empty() ? DsrnetParams::make(bins) : load_dsrnet_checkpoint(dsrnet_ckpt);

  EvalReport report = evaluate(rows, se, dsr, window, hop, threads);
  write_eval_csv(report_out, report);
  for (const SnrGroup &g : report.groups)
    std::cerr << "snr " << g.snr_db << " dB (" << g.count
              << " utts): mse_enhanced=" << g.mean_mse_enhanced
              << " mse_refined=" << g.mean_mse_refined
              << " delta=" << g.refined_minus_enhanced
              << " si_snr_noisy=" << g.mean_si_snr_noisy
              << " si_snr_enhanced=" << g.mean_si_snr_enhanced
              << " si_snr_refined=" << g.mean_si_snr_refined << "\n";
  std::cout << report_out << "\n";
  return 0;
}

int run_gradcheck(const std::string &component, uint64_t seed) {
  log_config("gradcheck", {{"component", component}, {"seed", std::to_string(seed)}});
  constexpr double kGate = 1e-4;
  double worst = 0.0;
  for (const GradCheckReport &r : gradcheck_component(component, seed)) {
    for (const GradCheckBlock &b : r.blocks) {
      std::cout << r.component << " " << b.name << " " << fmt_double(b.rel_err) << "\n";
      worst = std::max(worst, b.rel_err);
    }
  }
  std::cout << "max_rel_err " << fmt_double(worst) << "\n";
  return worst > kGate ? 1 : 0;
}

int run_sweep(const TrainFlags &flags, const std::string &alpha_values, double heldout_frac,
              const std::string &out) {
  auto kv = flags.resolved();
  kv.emplace_back("alpha_values", alpha_values);
  kv.emplace_back("heldout_frac", fmt_double(heldout_frac));
  kv.emplace_back("out", out);
  log_config("sweep", kv);

  std::vector<Manifest> rows = read_manifest(flags.manifest);
  const size_t heldout_n =
      std::max<size_t>(1, static_cast<size_t>(heldout_frac * static_cast<double>(rows.size())));
  if (heldout_n >= rows.size())
    throw std::runtime_error("sweep: heldout fraction leaves no training data");
  std::vector<Manifest> train_rows(rows.begin(), rows.end() - static_cast<long>(heldout_n));
  std::vector<Manifest> heldout_rows(rows.end() - static_cast<long>(heldout_n), rows.end());

  Corpus train_corpus = load_corpus(train_rows, flags.window, flags.hop);
  Corpus heldout = load_corpus(heldout_rows, flags.window, flags.hop);
  const int bins = static_cast<int>(train_corpus.utts[0].y.cols());

  Rng rng = Rng(flags.seed).fork(7);
  MaskEstimatorParams se = flags.make_estimator(bins, rng);
  DsrnetParams dsr = flags.make_dsrnet(bins, rng);

  std::vector<SweepRow> table =
      sweep_alpha(parse_double_list(alpha_values), train_corpus, heldout,
                  flags.train_config(TrainRegime::Joint), flags.loss_config(), se, dsr);
  write_sweep_csv(out, table);
  std::cout << out << "\n";
  return 0;
}

int run_spectrogram(const std::string &wav, const std::string &manifest, const std::string &utt,
                    const std::string &stage, const std::string &out_path,
                    const std::string &se_ckpt, const std::string &dsrnet_ckpt, int window,
                    int hop) {
  log_config("spectrogram", {{"wav", wav},
                             {"manifest", manifest},
                             {"utt", utt},
                             {"stage", stage},
                             {"out", out_path},
                             {"se_ckpt", se_ckpt},
                             {"dsrnet_ckpt", dsrnet_ckpt},
                             {"window", std::to_string(window)},
                             {"hop", std::to_string(hop)}});
  Mat y, s, n;  // magnitudes as available
  if (!wav.empty()) {
    y = magnitude(stft(read_wav(wav), window, hop)).frames;
    if (stage == "clean" || stage == "noisy") {
      write_spectrogram_image(out_path, y);
      std::cout << out_path << "\n";
      return 0;
    }
  } else {
    if (manifest.empty() || utt.empty())
      throw std::runtime_error("spectrogram: need --wav or --manifest with --utt");
    const std::vector<Manifest> rows = read_manifest(manifest);
    const Manifest *row = nullptr;
    for (const Manifest &r : rows)
      if (r.utt_id == utt) row = &r;
    if (!row) throw std::runtime_error("spectrogram: utt_id not found: " + utt);
    MagnitudeTriplet t = magnitude_triplet(*row, window, hop);
    if (stage == "clean") {
      write_spectrogram_image(out_path, t.s.frames);
      std::cout << out_path << "\n";
      return 0;
    }
    y = t.y.frames;
    s = t.s.frames;
    n = t.n.frames;
    if (stage == "noisy") {
      write_spectrogram_image(out_path, y);
      std::cout << out_path << "\n";
      return 0;
    }
  }

  // enhanced / refined stages need the model
  if (se_ckpt.empty()) throw std::runtime_error("spectrogram: stage " + stage + " needs --se-ckpt");
  MaskEstimatorParams se = load_estimator_checkpoint(se_ckpt);
  EnhancedPair pair = apply_mask(estimate_mask(se, y).mask, y);
  if (stage == "enhanced") {
    write_spectrogram_image(out_path, pair.s_hat);
  } else if (stage == "refined") {
    if (dsrnet_ckpt.empty())
      throw std::runtime_error("spectrogram: stage refined needs --dsrnet-ckpt");
    DsrnetParams dsr = load_dsrnet_checkpoint(dsrnet_ckpt);
    DsrnetForwardResult fwd = dsrnet_forward(dsr, pair);
    write_spectrogram_image(out_path, fwd.refined.s_tilde.cwiseMax(0.0));
  } else {
    throw std::runtime_error("spectrogram: unknown stage " + stage);
  }
  std::cout << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"spectrogram-domain speech enhancement and refinement toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file (key=value sections; flags win)");
  int threads = 1;
  app.add_option("--threads", threads, "Worker cap for parallel stages");

  // simulate
  auto *sim = app.add_subcommand("simulate", "Simulate a noisy corpus at controlled SNRs");
  std::string clean_dir, noise_dir, out_dir, snr = "random";
  uint64_t sim_seed = 0;
  int noise_index = -1;
  sim->add_option("--clean-dir", clean_dir, "Directory of clean WAVs")->required();
  sim->add_option("--noise-dir", noise_dir, "Directory of noise WAVs")->required();
  sim->add_option("--out-dir", out_dir, "Output directory")->required();
  sim->add_option("--snr", snr, "SNR in dB: 'random', a value, or a comma list");
  sim->add_option("--seed", sim_seed, "Master seed");
  sim->add_option("--noise-index", noise_index, "Fixed noise file index (-1 = random)");

  // train
  auto *train = app.add_subcommand("train", "Train the enhancement/refinement models");
  TrainFlags train_flags;
  std::string regime = "joint", ckpt_out, dsrnet_ckpt_out, trace_out;
  train->add_option("--regime", regime, "se|frozen|joint")
      ->check(CLI::IsMember({"se", "frozen", "joint"}));
  train_flags.add_to(train);
  train->add_option("--ckpt-out", ckpt_out, "Mask-estimator checkpoint output");
  train->add_option("--dsrnet-ckpt-out", dsrnet_ckpt_out, "Refine-network checkpoint output");
  train->add_option("--trace-out", trace_out, "Loss trace CSV output");

  // eval
  auto *eval_cmd = app.add_subcommand("eval", "Evaluate checkpoints over a manifest");
  std::string eval_manifest, eval_se_ckpt, eval_dsr_ckpt, report_out;
  bool use_oracle = false;
  int eval_window = 512, eval_hop = 128;
  eval_cmd->add_option("--manifest", eval_manifest, "Corpus manifest")->required();
  eval_cmd->add_option("--se-ckpt", eval_se_ckpt, "Mask-estimator checkpoint");
  eval_cmd->add_option("--dsrnet-ckpt", eval_dsr_ckpt, "Refine-network checkpoint");
  eval_cmd->add_flag("--oracle", use_oracle, "Use the ideal ratio mask instead of a checkpoint");
  eval_cmd->add_option("--report-out", report_out, "Report CSV output")->required();
  eval_cmd->add_option("--window", eval_window, "STFT window length");
  eval_cmd->add_option("--hop", eval_hop, "STFT hop length");

  // gradcheck
  auto *gc = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
  std::string component = "all";
  uint64_t gc_seed = 0;
  gc->add_option("--component", component, "enhance|dsrnet|loss|end-to-end|all")
      ->check(CLI::IsMember({"enhance", "mlp", "lstm", "dsrnet", "loss", "end-to-end", "all"}));
  gc->add_option("--seed", gc_seed, "Seed for the random instances");

  // sweep
  auto *sweep = app.add_subcommand("sweep", "Sweep the enhancement loss weight");
  TrainFlags sweep_flags;
  std::string alpha_values = "1,50,100,200,300,400";
  double heldout_frac = 0.2;
  std::string sweep_out;
  sweep_flags.add_to(sweep);
  sweep->add_option("--alpha-values", alpha_values, "Comma list of alpha values");
  sweep->add_option("--heldout-frac", heldout_frac, "Fraction of utterances held out");
  sweep->add_option("--out", sweep_out, "Sweep table CSV output")->required();

  // spectrogram
  auto *spec = app.add_subcommand("spectrogram", "Export a spectrogram image");
  std::string wav, sg_manifest, sg_utt, stage = "noisy", image_out, sg_se, sg_dsr;
  int sg_window = 512, sg_hop = 128;
  spec->add_option("--wav", wav, "Input WAV (alternative to --manifest/--utt)");
  spec->add_option("--manifest", sg_manifest, "Corpus manifest");
  spec->add_option("--utt", sg_utt, "Utterance id within the manifest");
  spec->add_option("--stage", stage, "noisy|clean|enhanced|refined")
      ->check(CLI::IsMember({"noisy", "clean", "enhanced", "refined"}));
  spec->add_option("--out", image_out, "Output image (.png or .pgm)")->required();
  spec->add_option("--se-ckpt", sg_se, "Mask-estimator checkpoint");
  spec->add_option("--dsrnet-ckpt", sg_dsr, "Refine-network checkpoint");
  spec->add_option("--window", sg_window, "STFT window length");
  spec->add_option("--hop", sg_hop, "STFT hop length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed())
      return run_simulate(clean_dir, noise_dir, out_dir, snr, sim_seed, noise_index);
    if (train->parsed())
      return run_train(train_flags, regime, ckpt_out, dsrnet_ckpt_out, trace_out);
    if (eval_cmd->parsed())
      return run_eval(eval_manifest, eval_se_ckpt, eval_dsr_ckpt, use_oracle, report_out,
                      eval_window, eval_hop, threads);
    if (gc->parsed()) return run_gradcheck(component, gc_seed);
    if (sweep->parsed()) return run_sweep(sweep_flags, alpha_values, heldout_frac, sweep_out);
    if (spec->parsed())
      return run_spectrogram(wav, sg_manifest, sg_utt, stage, image_out, sg_se, sg_dsr, sg_window,
                             sg_hop);
  } catch (const CLI::ParseError &e) {
    // flag values that only validate once the command runs
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
