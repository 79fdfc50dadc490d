// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "dsrn/dsrnet.hpp"
#include "dsrn/mel.hpp"
#include "dsrn/types.hpp"

namespace dsrn {

double mse(const Mat &a, const Mat &b);

// L1 error statistics of the refined pair and the resulting weighting:
// lambda = e_s_tilde / (e_s_tilde + e_n_tilde), or 0.5 when both are zero.
struct RefineErrors {
  double e_s_tilde = 0.0;
  double e_n_tilde = 0.0;
  double lambda = 0.5;
};

RefineErrors refine_errors(const RefinedPair &refined, const Mat &s, const Mat &n);

enum class LambdaMode { Dynamic, Fixed };
enum class DownstreamMode { None, FeatureProxy };

struct JointLossConfig {
  double alpha = 300.0;
  double beta = 100.0;
  LambdaMode lambda_mode = LambdaMode::Dynamic;
  double fixed_lambda = 0.5;
  DownstreamMode downstream_mode = DownstreamMode::None;
  // Dynamic lambda is treated as a per-batch constant (stop-gradient). This
  // flag enables full differentiation through the lambda ratio for study.
  bool differentiate_lambda = false;
  MelConfig proxy_mel;  // filterbank settings for the feature-proxy term

  void validate() const;
};

// lambda * MSE(s_tilde, s) + (1 - lambda) * MSE(n_tilde, n), with lambda from
// lambda_mode. Gradients treat lambda as constant unless differentiate_lambda.
struct RefineLossResult {
  double loss = 0.0;
  Mat d_s_tilde;
  Mat d_n_tilde;
  RefineErrors errors;
};

RefineLossResult refine_loss(const RefinedPair &refined, const Mat &s, const Mat &n,
                             const JointLossConfig &cfg);

// l_downstream + alpha * l_enh + beta * l_refine. All terms must be finite
// and nonnegative.
double joint_loss(double l_downstream, double l_enh, double l_refine, const JointLossConfig &cfg);

// Stand-in for a recognition back-end loss: MSE between log-mel features of
// clamp(s_tilde, 0) and of the clean magnitudes, with gradient through
// s_tilde.
struct FeatureProxyResult {
  double loss = 0.0;
  Mat d_s_tilde;
};

FeatureProxyResult feature_proxy_loss(const Mat &s_tilde, const Mat &s, const Mat &filterbank,
                                      double floor_value);

// e_s = s_hat - s, e_n = n_hat - n (per-utterance diagnostics).
struct ErrorDecomposition {
  Mat e_s;
  Mat e_n;

  double e_s_abs() const { return e_s.cwiseAbs().sum(); }
  double e_n_abs() const { return e_n.cwiseAbs().sum(); }
  // per-frequency-band sums of |e|, length F
  Vec e_s_per_band() const { return e_s.cwiseAbs().colwise().sum().transpose(); }
  Vec e_n_per_band() const { return e_n.cwiseAbs().colwise().sum().transpose(); }
};

ErrorDecomposition error_decomposition(const EnhancedPair &pair, const Mat &s, const Mat &n);

}  // namespace dsrn
