// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsrn/rng.hpp"
#include "dsrn/tensors.hpp"
#include "dsrn/types.hpp"

namespace dsrn {

// Enhanced/predicted-noise pair. n_hat is defined as y - s_hat, so the
// additive decomposition holds bitwise by construction.
struct EnhancedPair {
  Mat s_hat;
  Mat n_hat;
};

enum class EstimatorVariant { Oracle, Mlp, Lstm };

std::string variant_name(EstimatorVariant v);
EstimatorVariant variant_from_name(const std::string &s);

struct DenseLayer {
  Mat w;  // out x in
  Vec b;  // out
};

// Fused-gate LSTM layer, gate order [input, forget, candidate, output].
struct LstmLayer {
  Mat w_x;  // 4H x in
  Mat w_h;  // 4H x H
  Vec b;    // 4H
};

struct MaskEstimatorParams {
  EstimatorVariant variant = EstimatorVariant::Mlp;
  int input_dim = 0;
  int output_dim = 0;
  std::vector<DenseLayer> mlp_layers;  // tanh hidden layers (Mlp variant)
  std::vector<LstmLayer> lstm_layers;  // Lstm variant
  Mat w_out;                           // output_dim x top hidden size
  Vec b_out;                           // output_dim, sigmoid projection

  // Zero-allocated architectures; call estimator_default_init to randomize.
  static MaskEstimatorParams mlp(int input_dim, const std::vector<int> &hidden, int output_dim);
  static MaskEstimatorParams lstm(int input_dim, int hidden, int layers, int output_dim);
  static MaskEstimatorParams oracle(int dim);

  std::vector<int> hidden_dims() const;
  int lstm_hidden() const;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
void estimator_default_init(MaskEstimatorParams &p, Rng &rng);

std::vector<TensorRef> tensor_refs(MaskEstimatorParams &p);
inline std::vector<TensorRef> tensor_refs(const MaskEstimatorParams &p) {
  return tensor_refs(const_cast<MaskEstimatorParams &>(p));
}

struct MaskForwardCache {
  Mat x;                    // T x input_dim, log-compressed input
  std::vector<Mat> mlp_h;   // post-tanh activations per hidden layer
  struct LstmLayerCache {
    Mat i, f, g, o, c, tanh_c, h;  // T x H each
  };
  std::vector<LstmLayerCache> lstm;
  Mat mask;                 // T x output_dim
};

// M[t,f] = S/(S+N) where S+N > 0, else 0; clamped to [0,1].
Mat oracle_mask(const Mat &s, const Mat &n);

// Runs the trainable estimator on log(Y + 1e-8). Throws on non-finite
// activations, naming the offending layer.
struct MaskEstimate {
  Mat mask;
  MaskForwardCache cache;
};
MaskEstimate estimate_mask(const MaskEstimatorParams &p, const Mat &y);

// s_hat = M .* Y ; n_hat = Y - s_hat.
EnhancedPair apply_mask(const Mat &mask, const Mat &y);

// Mean over all T*F entries of (s_hat - s)^2, and its gradient.
double enh_loss(const Mat &s_hat, const Mat &s);
Mat enh_loss_backward(const Mat &s_hat, const Mat &s);

// Exact reverse-mode gradients for all parameters (BPTT for the Lstm
// variant). d_mask is dL/dM from the caller.
MaskEstimatorParams mask_estimator_backward(const MaskEstimatorParams &p,
                                            const MaskForwardCache &cache, const Mat &d_mask);

}  // namespace dsrn
