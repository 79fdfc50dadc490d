// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsrn/enhance.hpp"

#include <cmath>

namespace dsrn {

namespace {

constexpr double kLogOffset = 1e-8;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_finite(const Mat &m, const std::string &where) {
  if (!m.allFinite())
    throw std::runtime_error("mask estimator: non-finite activation in " + where);
}

Mat uniform_mat(Eigen::Index rows, Eigen::Index cols, double bound, Rng &rng) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

std::string variant_name(EstimatorVariant v) {
  switch (v) {
    case EstimatorVariant::Oracle: return "oracle";
    case EstimatorVariant::Mlp: return "mlp";
    case EstimatorVariant::Lstm: return "lstm";
  }
  return "?";
}

EstimatorVariant variant_from_name(const std::string &s) {
  if (s == "oracle") return EstimatorVariant::Oracle;
  if (s == "mlp") return EstimatorVariant::Mlp;
  if (s == "lstm") return EstimatorVariant::Lstm;
  throw std::invalid_argument("unknown estimator variant: " + s);
}

MaskEstimatorParams MaskEstimatorParams::mlp(int input_dim, const std::vector<int> &hidden,
                                             int output_dim) {
  if (input_dim < 1 || output_dim < 1 || hidden.empty())
    throw std::invalid_argument("mlp estimator: bad dims");
  MaskEstimatorParams p;
  p.variant = EstimatorVariant::Mlp;
  p.input_dim = input_dim;
  p.output_dim = output_dim;
  int in = input_dim;
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("mlp estimator: bad hidden size");
    p.mlp_layers.push_back({Mat::Zero(h, in), Vec::Zero(h)});
    in = h;
  }
  p.w_out = Mat::Zero(output_dim, in);
  p.b_out = Vec::Zero(output_dim);
  return p;
}

MaskEstimatorParams MaskEstimatorParams::lstm(int input_dim, int hidden, int layers,
                                              int output_dim) {
  if (input_dim < 1 || output_dim < 1 || hidden < 1 || layers < 1)
    throw std::invalid_argument("lstm estimator: bad dims");
  MaskEstimatorParams p;
  p.variant = EstimatorVariant::Lstm;
  p.input_dim = input_dim;
  p.output_dim = output_dim;
  int in = input_dim;
  for (int l = 0; l < layers; ++l) {
    p.lstm_layers.push_back(
        {Mat::Zero(4 * hidden, in), Mat::Zero(4 * hidden, hidden), Vec::Zero(4 * hidden)});
    in = hidden;
  }
  p.w_out = Mat::Zero(output_dim, hidden);
  p.b_out = Vec::Zero(output_dim);
  return p;
}

MaskEstimatorParams MaskEstimatorParams::oracle(int dim) {
  MaskEstimatorParams p;
  p.variant = EstimatorVariant::Oracle;
  p.input_dim = dim;
  p.output_dim = dim;
  return p;
}

std::vector<int> MaskEstimatorParams::hidden_dims() const {
  std::vector<int> dims;
  for (const DenseLayer &l : mlp_layers) dims.push_back(static_cast<int>(l.w.rows()));
  return dims;
}

int MaskEstimatorParams::lstm_hidden() const {
  return lstm_layers.empty() ? 0 : static_cast<int>(lstm_layers[0].w_h.cols());
}

void estimator_default_init(MaskEstimatorParams &p, Rng &rng) {
  for (DenseLayer &l : p.mlp_layers) {
    l.w = uniform_mat(l.w.rows(), l.w.cols(), 1.0 / std::sqrt(static_cast<double>(l.w.cols())), rng);
    l.b.setZero();
  }
  for (LstmLayer &l : p.lstm_layers) {
    const double bx = 1.0 / std::sqrt(static_cast<double>(l.w_x.cols()));
    const double bh = 1.0 / std::sqrt(static_cast<double>(l.w_h.cols()));
    l.w_x = uniform_mat(l.w_x.rows(), l.w_x.cols(), bx, rng);
    l.w_h = uniform_mat(l.w_h.rows(), l.w_h.cols(), bh, rng);
    l.b.setZero();
  }
  if (p.w_out.size() > 0) {
    const double bo = 1.0 / std::sqrt(static_cast<double>(p.w_out.cols()));
    p.w_out = uniform_mat(p.w_out.rows(), p.w_out.cols(), bo, rng);
    p.b_out.setZero();
  }
}

std::vector<TensorRef> tensor_refs(MaskEstimatorParams &p) {
  std::vector<TensorRef> refs;
  for (size_t l = 0; l < p.mlp_layers.size(); ++l) {
    refs.push_back(ref_of("mlp" + std::to_string(l) + ".w", p.mlp_layers[l].w));
    refs.push_back(ref_of("mlp" + std::to_string(l) + ".b", p.mlp_layers[l].b));
  }
  for (size_t l = 0; l < p.lstm_layers.size(); ++l) {
    refs.push_back(ref_of("lstm" + std::to_string(l) + ".w_x", p.lstm_layers[l].w_x));
    refs.push_back(ref_of("lstm" + std::to_string(l) + ".w_h", p.lstm_layers[l].w_h));
    refs.push_back(ref_of("lstm" + std::to_string(l) + ".b", p.lstm_layers[l].b));
  }
  if (p.w_out.size() > 0) {
    refs.push_back(ref_of("out.w", p.w_out));
    refs.push_back(ref_of("out.b", p.b_out));
  }
  return refs;
}

Mat oracle_mask(const Mat &s, const Mat &n) {
  require_same_shape(s, n, "oracle_mask");
  Mat m(s.rows(), s.cols());
  for (Eigen::Index t = 0; t < s.rows(); ++t)
    for (Eigen::Index f = 0; f < s.cols(); ++f) {
      const double denom = s(t, f) + n(t, f);
      double v = denom > 0.0 ? s(t, f) / denom : 0.0;
      m(t, f) = std::min(1.0, std::max(0.0, v));
    }
  return m;
}

MaskEstimate estimate_mask(const MaskEstimatorParams &p, const Mat &y) {
  if (p.variant == EstimatorVariant::Oracle)
    throw std::invalid_argument("estimate_mask: oracle variant has no forward pass; "
                                "use oracle_mask(S, N)");
  if (y.cols() != p.input_dim)
    throw ShapeError("estimate_mask: input has " + std::to_string(y.cols()) +
                     " bins, estimator expects " + std::to_string(p.input_dim));
  const Eigen::Index frames = y.rows();

  MaskEstimate out;
  MaskForwardCache &cache = out.cache;
  cache.x = (y.array() + kLogOffset).log().matrix();
  check_finite(cache.x, "input compression");

  const Mat *top = &cache.x;
  if (p.variant == EstimatorVariant::Mlp) {
    cache.mlp_h.reserve(p.mlp_layers.size());
    for (size_t l = 0; l < p.mlp_layers.size(); ++l) {
      const DenseLayer &layer = p.mlp_layers[l];
      Mat z = (*top) * layer.w.transpose();
      z.rowwise() += layer.b.transpose();
      cache.mlp_h.push_back(z.array().tanh().matrix());
      check_finite(cache.mlp_h.back(), "mlp layer " + std::to_string(l));
      top = &cache.mlp_h.back();
    }
  } else {
    const int hidden = p.lstm_hidden();
    cache.lstm.resize(p.lstm_layers.size());
    for (size_t l = 0; l < p.lstm_layers.size(); ++l) {
      const LstmLayer &layer = p.lstm_layers[l];
      MaskForwardCache::LstmLayerCache &c = cache.lstm[l];
      c.i.resize(frames, hidden);
      c.f.resize(frames, hidden);
      c.g.resize(frames, hidden);
      c.o.resize(frames, hidden);
      c.c.resize(frames, hidden);
      c.tanh_c.resize(frames, hidden);
      c.h.resize(frames, hidden);

      Vec h_prev = Vec::Zero(hidden);
      Vec c_prev = Vec::Zero(hidden);
      for (Eigen::Index t = 0; t < frames; ++t) {
        Vec z = layer.w_x * top->row(t).transpose() + layer.w_h * h_prev + layer.b;
        for (int k = 0; k < hidden; ++k) {
          const double iv = sigmoid(z[k]);
          const double fv = sigmoid(z[hidden + k]);
          const double gv = std::tanh(z[2 * hidden + k]);
          const double ov = sigmoid(z[3 * hidden + k]);
          const double cv = fv * c_prev[k] + iv * gv;
          const double tc = std::tanh(cv);
          c.i(t, k) = iv;
          c.f(t, k) = fv;
          c.g(t, k) = gv;
          c.o(t, k) = ov;
          c.c(t, k) = cv;
          c.tanh_c(t, k) = tc;
          c.h(t, k) = ov * tc;
        }
        h_prev = c.h.row(t).transpose();
        c_prev = c.c.row(t).transpose();
      }
      check_finite(c.h, "lstm layer " + std::to_string(l));
      top = &c.h;
    }
  }

  Mat logits = (*top) * p.w_out.transpose();
  logits.rowwise() += p.b_out.transpose();
  check_finite(logits, "output layer");
  cache.mask = logits.unaryExpr([](double z) { return sigmoid(z); });
  out.mask = cache.mask;
  return out;
}

EnhancedPair apply_mask(const Mat &mask, const Mat &y) {
  require_same_shape(mask, y, "apply_mask");
  EnhancedPair p;
  p.s_hat = mask.cwiseProduct(y);
  p.n_hat = y - p.s_hat;
  return p;
}

double enh_loss(const Mat &s_hat, const Mat &s) {
  require_same_shape(s_hat, s, "enh_loss");
  return (s_hat - s).squaredNorm() / static_cast<double>(s_hat.size());
}

Mat enh_loss_backward(const Mat &s_hat, const Mat &s) {
  require_same_shape(s_hat, s, "enh_loss_backward");
  return 2.0 / static_cast<double>(s_hat.size()) * (s_hat - s);
}

MaskEstimatorParams mask_estimator_backward(const MaskEstimatorParams &p,
                                            const MaskForwardCache &cache, const Mat &d_mask) {
  if (p.variant == EstimatorVariant::Oracle)
    throw std::invalid_argument("mask_estimator_backward: oracle variant has no parameters");
  require_same_shape(d_mask, cache.mask, "mask_estimator_backward");
  if (cache.x.cols() != p.input_dim ||
      (p.variant == EstimatorVariant::Mlp && cache.mlp_h.size() != p.mlp_layers.size()) ||
      (p.variant == EstimatorVariant::Lstm && cache.lstm.size() != p.lstm_layers.size()))
    throw std::invalid_argument("mask_estimator_backward: cache does not match params");

  MaskEstimatorParams grads = zeros_like(p);
  const Eigen::Index frames = cache.x.rows();

  // sigmoid output projection
  Mat d_logits =
      d_mask.cwiseProduct(cache.mask.cwiseProduct((1.0 - cache.mask.array()).matrix()));
  const Mat &top = p.variant == EstimatorVariant::Mlp
                       ? (cache.mlp_h.empty() ? cache.x : cache.mlp_h.back())
                       : cache.lstm.back().h;
  grads.w_out = d_logits.transpose() * top;
  grads.b_out = d_logits.colwise().sum().transpose();
  Mat d_top = d_logits * p.w_out;

  if (p.variant == EstimatorVariant::Mlp) {
    Mat d_h = std::move(d_top);
    for (size_t li = p.mlp_layers.size(); li-- > 0;) {
      const Mat &h = cache.mlp_h[li];
      const Mat &below = li == 0 ? cache.x : cache.mlp_h[li - 1];
      Mat d_z = d_h.cwiseProduct((1.0 - h.array().square()).matrix());
      grads.mlp_layers[li].w = d_z.transpose() * below;
      grads.mlp_layers[li].b = d_z.colwise().sum().transpose();
      d_h = d_z * p.mlp_layers[li].w;
    }
    return grads;
  }

  // LSTM backpropagation through time, top layer first
  const int hidden = p.lstm_hidden();
  Mat d_h_all = std::move(d_top);  // T x H upstream gradient for current layer
  for (size_t li = p.lstm_layers.size(); li-- > 0;) {
    const LstmLayer &layer = p.lstm_layers[li];
    const MaskForwardCache::LstmLayerCache &c = cache.lstm[li];
    const Mat &below = li == 0 ? cache.x : cache.lstm[li - 1].h;
    LstmLayer &g = grads.lstm_layers[li];
    Mat d_below = Mat::Zero(frames, below.cols());

    Vec d_h_rec = Vec::Zero(hidden);
    Vec d_c_rec = Vec::Zero(hidden);
    Vec d_z(4 * hidden);
    for (Eigen::Index t = frames - 1; t >= 0; --t) {
      for (int k = 0; k < hidden; ++k) {
        const double dh = d_h_all(t, k) + d_h_rec[k];
        const double iv = c.i(t, k), fv = c.f(t, k), gv = c.g(t, k), ov = c.o(t, k);
        const double tc = c.tanh_c(t, k);
        const double c_prev = t > 0 ? c.c(t - 1, k) : 0.0;
        const double d_o = dh * tc;
        const double d_c = dh * ov * (1.0 - tc * tc) + d_c_rec[k];
        const double d_i = d_c * gv;
        const double d_g = d_c * iv;
        const double d_f = d_c * c_prev;
        d_c_rec[k] = d_c * fv;
        d_z[k] = d_i * iv * (1.0 - iv);
        d_z[hidden + k] = d_f * fv * (1.0 - fv);
        d_z[2 * hidden + k] = d_g * (1.0 - gv * gv);
        d_z[3 * hidden + k] = d_o * ov * (1.0 - ov);
      }
      g.w_x += d_z * below.row(t);
      if (t > 0) g.w_h += d_z * c.h.row(t - 1);
      g.b += d_z;
      d_below.row(t) = (layer.w_x.transpose() * d_z).transpose();
      d_h_rec = layer.w_h.transpose() * d_z;
    }
    d_h_all = std::move(d_below);
  }
  return grads;
}

}  // namespace dsrn
