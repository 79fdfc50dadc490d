// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "dsrn/enhance.hpp"
#include "dsrn/rng.hpp"
#include "dsrn/tensors.hpp"
#include "dsrn/types.hpp"

namespace dsrn {

// One refinement stream: theta = w_out * (w_from_s * s_hat + w_from_n * n_hat) + b_out,
// applied per frame. Purely linear, no activation.
struct DsrnetStream {
  Mat w_from_s;  // F x F (empty on the noise stream when inner weights are shared)
  Mat w_from_n;  // F x F
  Mat w_out;     // F x F
  Vec b_out;     // F
};

struct DsrnetParams {
  int dim = 0;
  bool share_inner = false;  // noise stream reuses the speech stream's inner pair
  DsrnetStream speech;
  DsrnetStream noise;

  static DsrnetParams make(int dim, bool share_inner = false);
};

// Inner weights ~ uniform(-1/sqrt(F), 1/sqrt(F)); outer transform and bias
// zero, so the refinement starts as an exact identity.
void dsrnet_default_init(DsrnetParams &p, Rng &rng);
// All weights random (ablation / gradient-check use).
void dsrnet_random_init(DsrnetParams &p, Rng &rng);

std::vector<TensorRef> tensor_refs(DsrnetParams &p);
inline std::vector<TensorRef> tensor_refs(const DsrnetParams &p) {
  return tensor_refs(const_cast<DsrnetParams &>(p));
}

struct ResidualPair {
  Mat theta_s;  // T x F, may be negative
  Mat theta_n;
};

struct RefinedPair {
  Mat s_tilde;  // s_hat + theta_s; not clamped during training
  Mat n_tilde;
};

struct DsrnetCache {
  Mat s_hat, n_hat;  // inputs
  Mat h_s, h_n;      // inner activations per stream, T x F
};

struct DsrnetForwardResult {
  ResidualPair residual;
  RefinedPair refined;
  DsrnetCache cache;
};

DsrnetForwardResult dsrnet_forward(const DsrnetParams &p, const EnhancedPair &pair);

struct DsrnetBackwardResult {
  DsrnetParams grads;
  Mat d_s_hat;  // includes the identity path d_s_tilde
  Mat d_n_hat;
};

// Caller composes -d_n_hat into the mask gradient to account for the
// n_hat = y - s_hat coupling.
DsrnetBackwardResult dsrnet_backward(const DsrnetParams &p, const DsrnetCache &cache,
                                     const Mat &d_s_tilde, const Mat &d_n_tilde);

}  // namespace dsrn
