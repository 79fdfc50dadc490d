// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "dsrn/loss.hpp"

#include <cmath>

namespace dsrn {

double mse(const Mat &a, const Mat &b) {
  require_same_shape(a, b, "mse");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

void JointLossConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0))
    throw std::invalid_argument("loss config: alpha and beta must be nonnegative");
  if (lambda_mode == LambdaMode::Fixed && !(fixed_lambda >= 0.0 && fixed_lambda <= 1.0))
    throw std::invalid_argument("loss config: fixed lambda must lie in [0, 1]");
}

RefineErrors refine_errors(const RefinedPair &refined, const Mat &s, const Mat &n) {
  require_same_shape(refined.s_tilde, s, "refine_errors");
  require_same_shape(refined.n_tilde, n, "refine_errors");
  RefineErrors e;
  e.e_s_tilde = (s - refined.s_tilde).cwiseAbs().sum();
  e.e_n_tilde = (n - refined.n_tilde).cwiseAbs().sum();
  const double denom = e.e_s_tilde + e.e_n_tilde;
  e.lambda = denom > 0.0 ? e.e_s_tilde / denom : 0.5;
  return e;
}

RefineLossResult refine_loss(const RefinedPair &refined, const Mat &s, const Mat &n,
                             const JointLossConfig &cfg) {
  cfg.validate();
  RefineLossResult r;
  r.errors = refine_errors(refined, s, n);
  const double lambda =
      cfg.lambda_mode == LambdaMode::Fixed ? cfg.fixed_lambda : r.errors.lambda;

  const double inv = 1.0 / static_cast<double>(s.size());
  const double mse_s = (refined.s_tilde - s).squaredNorm() * inv;
  const double mse_n = (refined.n_tilde - n).squaredNorm() * inv;
  r.loss = lambda * mse_s + (1.0 - lambda) * mse_n;

  r.d_s_tilde = (2.0 * lambda * inv) * (refined.s_tilde - s);
  r.d_n_tilde = (2.0 * (1.0 - lambda) * inv) * (refined.n_tilde - n);

  if (cfg.differentiate_lambda && cfg.lambda_mode == LambdaMode::Dynamic) {
    const double denom = r.errors.e_s_tilde + r.errors.e_n_tilde;
    if (denom > 0.0) {
      const double dl_dlambda = mse_s - mse_n;
      const double dlambda_des = r.errors.e_n_tilde / (denom * denom);
      const double dlambda_den = -r.errors.e_s_tilde / (denom * denom);
      // d e_s_tilde / d s_tilde = sign(s_tilde - s); subgradient 0 at ties
      r.d_s_tilde += (dl_dlambda * dlambda_des) *
                     (refined.s_tilde - s).unaryExpr([](double v) {
                       return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
                     });
      r.d_n_tilde += (dl_dlambda * dlambda_den) *
                     (refined.n_tilde - n).unaryExpr([](double v) {
                       return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
                     });
    }
  }
  return r;
}

double joint_loss(double l_downstream, double l_enh, double l_refine,
                  const JointLossConfig &cfg) {
  cfg.validate();
  if (!std::isfinite(l_downstream) || !std::isfinite(l_enh) || !std::isfinite(l_refine))
    throw std::invalid_argument("joint_loss: non-finite loss term");
  if (l_downstream < 0.0 || l_enh < 0.0 || l_refine < 0.0)
    throw std::invalid_argument("joint_loss: negative loss term");
  return l_downstream + cfg.alpha * l_enh + cfg.beta * l_refine;
}

FeatureProxyResult feature_proxy_loss(const Mat &s_tilde, const Mat &s, const Mat &filterbank,
                                      double floor_value) {
  require_same_shape(s_tilde, s, "feature_proxy_loss");
  if (filterbank.cols() != s_tilde.cols())
    throw ShapeError("feature_proxy_loss: filterbank bins do not match input");

  const Mat clamped = s_tilde.cwiseMax(0.0);
  const Mat power = clamped.cwiseProduct(clamped);
  const Mat mel_e = power * filterbank.transpose();  // T x M
  const Mat feat_e = mel_e.cwiseMax(floor_value).array().log().matrix();
  const Mat feat_r = log_mel_features(s, filterbank, floor_value);

  FeatureProxyResult r;
  const double inv = 1.0 / static_cast<double>(feat_e.size());
  r.loss = (feat_e - feat_r).squaredNorm() * inv;

  // d loss / d feat_e -> d mel_e (zero below the floor) -> d power -> d s_tilde
  Mat g = (2.0 * inv) * (feat_e - feat_r);
  for (Eigen::Index t = 0; t < g.rows(); ++t)
    for (Eigen::Index m = 0; m < g.cols(); ++m)
      g(t, m) = mel_e(t, m) > floor_value ? g(t, m) / mel_e(t, m) : 0.0;
  r.d_s_tilde = (g * filterbank).cwiseProduct(2.0 * clamped);
  return r;
}

ErrorDecomposition error_decomposition(const EnhancedPair &pair, const Mat &s, const Mat &n) {
  require_same_shape(pair.s_hat, s, "error_decomposition");
  require_same_shape(pair.n_hat, n, "error_decomposition");
  ErrorDecomposition d;
  d.e_s = pair.s_hat - s;
  d.e_n = pair.n_hat - n;
  return d;
}

}  // namespace dsrn
