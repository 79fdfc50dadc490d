// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dsrn/types.hpp"

namespace dsrn {

// Flat view over one named parameter tensor. Parameter structs expose their
// tensors through tensor_refs() overloads so optimizers, checkpoints and the
// finite-difference harness can walk them generically.
struct TensorRef {
  std::string name;
  double *data = nullptr;
  std::vector<Eigen::Index> shape;  // {rows, cols} for matrices, {n} for vectors

  Eigen::Index size() const {
    Eigen::Index s = 1;
    for (Eigen::Index d : shape) s *= d;
    return s;
  }
};

inline TensorRef ref_of(const std::string &name, Mat &m) {
  return {name, m.data(), {m.rows(), m.cols()}};
}

inline TensorRef ref_of(const std::string &name, Vec &v) { return {name, v.data(), {v.size()}}; }

inline double tensors_sq_norm(const std::vector<TensorRef> &refs) {
  double s = 0.0;
  for (const TensorRef &t : refs)
    for (Eigen::Index i = 0; i < t.size(); ++i) s += t.data[i] * t.data[i];
  return s;
}

inline void tensors_scale(const std::vector<TensorRef> &refs, double factor) {
  for (const TensorRef &t : refs)
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] *= factor;
}

inline void tensors_set_zero(const std::vector<TensorRef> &refs) {
  for (const TensorRef &t : refs) std::fill(t.data, t.data + t.size(), 0.0);
}

template <class P>
P zeros_like(const P &p) {
  P z = p;
  tensors_set_zero(tensor_refs(z));
  return z;
}

template <class P>
double param_checksum(const P &p) {
  double s = 0.0;
  for (const TensorRef &t : tensor_refs(const_cast<P &>(p)))
    for (Eigen::Index i = 0; i < t.size(); ++i) s += t.data[i] * static_cast<double>(i % 97 + 1);
  return s;
}

}  // namespace dsrn
