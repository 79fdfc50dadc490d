// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>

#include "dsrn/tensors.hpp"

namespace dsrn {

template <class P>
void sgd_step(P &params, const P &grads, double lr) {
  auto pr = tensor_refs(params);
  auto gr = tensor_refs(grads);
  for (size_t b = 0; b < pr.size(); ++b)
    for (Eigen::Index i = 0; i < pr[b].size(); ++i) pr[b].data[i] -= lr * gr[b].data[i];
}

// Adam with bias-corrected moments. A zero gradient leaves parameters
// unchanged as long as the moments are zero.
template <class P>
struct AdamState {
  P m;
  P v;
  int64_t t = 0;

  explicit AdamState(const P &like) : m(zeros_like(like)), v(zeros_like(like)) {}
};

template <class P>
void adam_step(P &params, const P &grads, AdamState<P> &st, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8) {
  st.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.t));
  auto pr = tensor_refs(params);
  auto gr = tensor_refs(grads);
  auto mr = tensor_refs(st.m);
  auto vr = tensor_refs(st.v);
  for (size_t b = 0; b < pr.size(); ++b) {
    for (Eigen::Index i = 0; i < pr[b].size(); ++i) {
      const double g = gr[b].data[i];
      mr[b].data[i] = beta1 * mr[b].data[i] + (1.0 - beta1) * g;
      vr[b].data[i] = beta2 * vr[b].data[i] + (1.0 - beta2) * g * g;
      const double mhat = mr[b].data[i] / bc1;
      const double vhat = vr[b].data[i] / bc2;
      pr[b].data[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

}  // namespace dsrn
