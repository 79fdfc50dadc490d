// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsrn/dsrnet.hpp"

#include <cmath>

namespace dsrn {

namespace {

Mat uniform_mat(Eigen::Index rows, Eigen::Index cols, double bound, Rng &rng) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

DsrnetParams DsrnetParams::make(int dim, bool share_inner) {
  if (dim < 1) throw std::invalid_argument("dsrnet: dim must be >= 1");
  DsrnetParams p;
  p.dim = dim;
  p.share_inner = share_inner;
  p.speech.w_from_s = Mat::Zero(dim, dim);
  p.speech.w_from_n = Mat::Zero(dim, dim);
  p.speech.w_out = Mat::Zero(dim, dim);
  p.speech.b_out = Vec::Zero(dim);
  if (!share_inner) {
    p.noise.w_from_s = Mat::Zero(dim, dim);
    p.noise.w_from_n = Mat::Zero(dim, dim);
  }
  p.noise.w_out = Mat::Zero(dim, dim);
  p.noise.b_out = Vec::Zero(dim);
  return p;
}

void dsrnet_default_init(DsrnetParams &p, Rng &rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(p.dim));
  p.speech.w_from_s = uniform_mat(p.dim, p.dim, bound, rng);
  p.speech.w_from_n = uniform_mat(p.dim, p.dim, bound, rng);
  p.speech.w_out.setZero();
  p.speech.b_out.setZero();
  if (!p.share_inner) {
    p.noise.w_from_s = uniform_mat(p.dim, p.dim, bound, rng);
    p.noise.w_from_n = uniform_mat(p.dim, p.dim, bound, rng);
  }
  p.noise.w_out.setZero();
  p.noise.b_out.setZero();
}

void dsrnet_random_init(DsrnetParams &p, Rng &rng) {
  dsrnet_default_init(p, rng);
  const double bound = 1.0 / std::sqrt(static_cast<double>(p.dim));
  p.speech.w_out = uniform_mat(p.dim, p.dim, bound, rng);
  p.speech.b_out = uniform_mat(p.dim, 1, bound, rng).col(0);
  p.noise.w_out = uniform_mat(p.dim, p.dim, bound, rng);
  p.noise.b_out = uniform_mat(p.dim, 1, bound, rng).col(0);
}

std::vector<TensorRef> tensor_refs(DsrnetParams &p) {
  std::vector<TensorRef> refs;
  refs.push_back(ref_of("speech.w_from_s", p.speech.w_from_s));
  refs.push_back(ref_of("speech.w_from_n", p.speech.w_from_n));
  refs.push_back(ref_of("speech.w_out", p.speech.w_out));
  refs.push_back(ref_of("speech.b_out", p.speech.b_out));
  if (!p.share_inner) {
    refs.push_back(ref_of("noise.w_from_s", p.noise.w_from_s));
    refs.push_back(ref_of("noise.w_from_n", p.noise.w_from_n));
  }
  refs.push_back(ref_of("noise.w_out", p.noise.w_out));
  refs.push_back(ref_of("noise.b_out", p.noise.b_out));
  return refs;
}

DsrnetForwardResult dsrnet_forward(const DsrnetParams &p, const EnhancedPair &pair) {
  require_same_shape(pair.s_hat, pair.n_hat, "dsrnet_forward");
  if (pair.s_hat.cols() != p.dim)
    throw ShapeError("dsrnet_forward: input has " + std::to_string(pair.s_hat.cols()) +
                     " bins, params expect " + std::to_string(p.dim));

  const DsrnetStream &inner_n = p.share_inner ? p.speech : p.noise;
  DsrnetForwardResult r;
  r.cache.s_hat = pair.s_hat;
  r.cache.n_hat = pair.n_hat;
  r.cache.h_s =
      pair.s_hat * p.speech.w_from_s.transpose() + pair.n_hat * p.speech.w_from_n.transpose();
  r.cache.h_n =
      pair.s_hat * inner_n.w_from_s.transpose() + pair.n_hat * inner_n.w_from_n.transpose();

  r.residual.theta_s = r.cache.h_s * p.speech.w_out.transpose();
  r.residual.theta_s.rowwise() += p.speech.b_out.transpose();
  r.residual.theta_n = r.cache.h_n * p.noise.w_out.transpose();
  r.residual.theta_n.rowwise() += p.noise.b_out.transpose();

  r.refined.s_tilde = pair.s_hat + r.residual.theta_s;
  r.refined.n_tilde = pair.n_hat + r.residual.theta_n;
  return r;
}

DsrnetBackwardResult dsrnet_backward(const DsrnetParams &p, const DsrnetCache &cache,
                                     const Mat &d_s_tilde, const Mat &d_n_tilde) {
  require_same_shape(d_s_tilde, cache.s_hat, "dsrnet_backward");
  require_same_shape(d_n_tilde, cache.n_hat, "dsrnet_backward");
  if (cache.h_s.cols() != p.dim)
    throw std::invalid_argument("dsrnet_backward: cache does not match params");

  DsrnetBackwardResult r;
  r.grads = zeros_like(p);
  // identity paths of s_tilde = s_hat + theta_s
  r.d_s_hat = d_s_tilde;
  r.d_n_hat = d_n_tilde;

  // speech stream
  {
    const Mat &g = d_s_tilde;  // d theta_s
    r.grads.speech.w_out = g.transpose() * cache.h_s;
    r.grads.speech.b_out = g.colwise().sum().transpose();
    Mat d_h = g * p.speech.w_out;
    r.grads.speech.w_from_s += d_h.transpose() * cache.s_hat;
    r.grads.speech.w_from_n += d_h.transpose() * cache.n_hat;
    r.d_s_hat += d_h * p.speech.w_from_s;
    r.d_n_hat += d_h * p.speech.w_from_n;
  }
  // noise stream
  {
    const Mat &g = d_n_tilde;  // d theta_n
    const DsrnetStream &inner = p.share_inner ? p.speech : p.noise;
    DsrnetStream &ginner = p.share_inner ? r.grads.speech : r.grads.noise;
    r.grads.noise.w_out = g.transpose() * cache.h_n;
    r.grads.noise.b_out = g.colwise().sum().transpose();
    Mat d_h = g * p.noise.w_out;
    ginner.w_from_s += d_h.transpose() * cache.s_hat;
    ginner.w_from_n += d_h.transpose() * cache.n_hat;
    r.d_s_hat += d_h * inner.w_from_s;
    r.d_n_hat += d_h * inner.w_from_n;
  }
  return r;
}

}  // namespace dsrn
