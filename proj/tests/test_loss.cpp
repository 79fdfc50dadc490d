// Copyright 2026 DSRN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "dsrn/loss.hpp"
#include "dsrn/mel.hpp"
#include "support/test_util.hpp"

using namespace dsrn;
using namespace dsrn::testing;

namespace {

Mat random_mat(Eigen::Index r, Eigen::Index c, Rng &rng, double lo = 0.0, double hi = 1.0) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

// lambda from two scalar L1 sums via 1x1 refined pairs
double lambda_of(double e_s, double e_n) {
  RefinedPair r{Mat::Constant(1, 1, e_s), Mat::Constant(1, 1, e_n)};
  return refine_errors(r, Mat::Zero(1, 1), Mat::Zero(1, 1)).lambda;
}

}  // namespace

TEST_CASE("refine_errors: arithmetic of the weighting") {
  CHECK(lambda_of(2.0, 2.0) == 0.5);
  CHECK(lambda_of(3.0, 1.0) == 0.75);
  CHECK(lambda_of(0.0, 0.0) == 0.5);  // declared degenerate convention
  CHECK(lambda_of(1.0, 0.0) == 1.0);
  CHECK(lambda_of(0.0, 1.0) == 0.0);
}

TEST_CASE("refine_errors: L1 statistics over all entries") {
  Rng rng(1);
  Mat s = random_mat(4, 5, rng);
  Mat n = random_mat(4, 5, rng);
  RefinedPair r{random_mat(4, 5, rng, -1.0, 1.0), random_mat(4, 5, rng, -1.0, 1.0)};
  RefineErrors e = refine_errors(r, s, n);
  CHECK(e.e_s_tilde == doctest::Approx((s - r.s_tilde).cwiseAbs().sum()).epsilon(1e-15));
  CHECK(e.e_n_tilde == doctest::Approx((n - r.n_tilde).cwiseAbs().sum()).epsilon(1e-15));
  CHECK(e.lambda >= 0.0);
  CHECK(e.lambda <= 1.0);
}

TEST_CASE("lambda law: range, symmetry, fixed points and monotonicity") {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(0.0, 10.0);
    const double b = rng.uniform(0.0, 10.0);
    const double l = lambda_of(a, b);
    CHECK(l >= 0.0);
    CHECK(l <= 1.0);
    if (a > 0.0) CHECK(lambda_of(a, a) == 0.5);
    // strictly increasing in the first argument while the second is fixed
    if (b > 0.0) CHECK(lambda_of(a + 0.5, b) > l);
  }
}

TEST_CASE("refine_loss: endpoint reductions are exact") {
  Rng rng(3);
  Mat s = random_mat(5, 6, rng);
  Mat n = random_mat(5, 6, rng);
  RefinedPair r{random_mat(5, 6, rng), random_mat(5, 6, rng)};

  JointLossConfig cfg;
  cfg.lambda_mode = LambdaMode::Fixed;
  cfg.fixed_lambda = 1.0;
  CHECK(refine_loss(r, s, n, cfg).loss == mse(r.s_tilde, s));
  cfg.fixed_lambda = 0.0;
  CHECK(refine_loss(r, s, n, cfg).loss == mse(r.n_tilde, n));
  cfg.fixed_lambda = 0.5;
  CHECK(refine_loss(r, s, n, cfg).loss ==
        doctest::Approx(0.5 * (mse(r.s_tilde, s) + mse(r.n_tilde, n))).epsilon(1e-15));
}

TEST_CASE("refine_loss: perfect refinement gives zero loss and the 0.5 convention") {
  Rng rng(4);
  Mat s = random_mat(3, 4, rng);
  Mat n = random_mat(3, 4, rng);
  RefinedPair perfect{s, n};
  JointLossConfig cfg;  // dynamic
  RefineLossResult res = refine_loss(perfect, s, n, cfg);
  CHECK(res.loss == 0.0);
  CHECK(res.errors.lambda == 0.5);
  CHECK(res.d_s_tilde.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("refine_loss: exchange symmetry with lambda swapped") {
  Rng rng(5);
  Mat s = random_mat(4, 4, rng);
  Mat n = random_mat(4, 4, rng);
  RefinedPair r{random_mat(4, 4, rng), random_mat(4, 4, rng)};
  JointLossConfig cfg;  // dynamic lambda swaps with the streams automatically
  RefineLossResult a = refine_loss(r, s, n, cfg);
  RefinedPair swapped{r.n_tilde, r.s_tilde};
  RefineLossResult b = refine_loss(swapped, n, s, cfg);
  CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-15));
  CHECK(a.errors.lambda == doctest::Approx(1.0 - b.errors.lambda).epsilon(1e-15));
}

TEST_CASE("refine_loss: fixed-lambda gradients match finite differences") {
  Rng rng(6);
  Mat s = random_mat(4, 5, rng);
  Mat n = random_mat(4, 5, rng);
  RefinedPair r{random_mat(4, 5, rng), random_mat(4, 5, rng)};
  JointLossConfig cfg;
  cfg.lambda_mode = LambdaMode::Fixed;
  cfg.fixed_lambda = 0.7;

  RefineLossResult res = refine_loss(r, s, n, cfg);
  auto loss = [&] { return refine_loss(r, s, n, cfg).loss; };
  CHECK(rel_err(res.d_s_tilde, fd_gradient(r.s_tilde, loss)) < 1e-9);
  CHECK(rel_err(res.d_n_tilde, fd_gradient(r.n_tilde, loss)) < 1e-9);
}

TEST_CASE("refine_loss: dynamic gradients equal fixed-lambda gradients at the batch value") {
  // stop-gradient contract
  Rng rng(7);
  Mat s = random_mat(4, 5, rng);
  Mat n = random_mat(4, 5, rng);
  RefinedPair r{random_mat(4, 5, rng), random_mat(4, 5, rng)};

  JointLossConfig dynamic_cfg;  // dynamic, stop-gradient
  RefineLossResult dyn = refine_loss(r, s, n, dynamic_cfg);

  JointLossConfig fixed_cfg;
  fixed_cfg.lambda_mode = LambdaMode::Fixed;
  fixed_cfg.fixed_lambda = dyn.errors.lambda;
  RefineLossResult fix = refine_loss(r, s, n, fixed_cfg);
  CHECK((dyn.d_s_tilde - fix.d_s_tilde).cwiseAbs().maxCoeff() == 0.0);
  CHECK((dyn.d_n_tilde - fix.d_n_tilde).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("refine_loss: full differentiation through lambda matches finite differences") {
  // entries kept away from the |.| kinks so central differences are clean
  Rng rng(8);
  Mat s = random_mat(3, 4, rng);
  Mat n = random_mat(3, 4, rng);
  Mat ds(3, 4), dn(3, 4);
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    ds.data()[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.3, 0.6);
    dn.data()[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.3, 0.6);
  }
  RefinedPair r{s + ds, n + dn};
  JointLossConfig cfg;
  cfg.differentiate_lambda = true;

  RefineLossResult res = refine_loss(r, s, n, cfg);
  auto loss = [&] { return refine_loss(r, s, n, cfg).loss; };
  CHECK(rel_err(res.d_s_tilde, fd_gradient(r.s_tilde, loss)) < 1e-7);
  CHECK(rel_err(res.d_n_tilde, fd_gradient(r.n_tilde, loss)) < 1e-7);
}

TEST_CASE("joint_loss: weighted sum and its edge cases") {
  JointLossConfig cfg;  // alpha 300, beta 100
  CHECK(joint_loss(0.0, 0.01, 0.02, cfg) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(joint_loss(0.0, 0.0, 0.0, cfg) == 0.0);

  cfg.beta = 0.0;  // refine term disabled
  CHECK(joint_loss(0.0, 0.01, 123.0, cfg) == doctest::Approx(3.0).epsilon(1e-15));

  CHECK_THROWS_AS(joint_loss(std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, cfg),
                  std::invalid_argument);
  CHECK_THROWS_AS(joint_loss(0.0, -1.0, 0.0, cfg), std::invalid_argument);
  JointLossConfig bad;
  bad.alpha = -1.0;
  CHECK_THROWS_AS(joint_loss(0.0, 0.0, 0.0, bad), std::invalid_argument);
}

TEST_CASE("error_decomposition: oracle mask in synthetic mode leaves no error") {
  Rng rng(9);
  MagnitudeTriplet t = synthetic_band_triplet(6, 17, rng);
  EnhancedPair pair = apply_mask(oracle_mask(t.s.frames, t.n.frames), t.y.frames);
  ErrorDecomposition d = error_decomposition(pair, t.s.frames, t.n.frames);
  CHECK(d.e_s_abs() < 1e-13);
  CHECK(d.e_n_abs() < 1e-13);
}

TEST_CASE("error_decomposition: an all-ones mask leaks all noise into speech") {
  Rng rng(10);
  MagnitudeTriplet t = synthetic_band_triplet(6, 17, rng);
  EnhancedPair pair = apply_mask(Mat::Ones(6, 17), t.y.frames);
  ErrorDecomposition d = error_decomposition(pair, t.s.frames, t.n.frames);
  CHECK(rel_err(d.e_s, t.n.frames) < 1e-14);
  CHECK(rel_err(d.e_n, -t.n.frames) < 1e-14);
}

TEST_CASE("error_decomposition: e_s + e_n = Y - (S + N) identically") {
  Rng rng(11);
  Mat y = random_mat(5, 8, rng, 0.0, 3.0);
  Mat s = random_mat(5, 8, rng);
  Mat n = random_mat(5, 8, rng);
  EnhancedPair pair = apply_mask(random_mat(5, 8, rng), y);
  ErrorDecomposition d = error_decomposition(pair, s, n);
  Mat lhs = d.e_s + d.e_n;
  Mat rhs = y - (s + n);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("error_decomposition: per-band diagnostics") {
  Mat s_hat(2, 3), s(2, 3);
  s_hat << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
  s << 0.5, 2.5, 2.0, 4.0, 4.0, 7.0;
  EnhancedPair pair{s_hat, Mat::Zero(2, 3)};
  ErrorDecomposition d = error_decomposition(pair, s, Mat::Zero(2, 3));
  Vec per_band = d.e_s_per_band();
  CHECK(per_band(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(per_band(1) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(per_band(2) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(d.e_s_abs() == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("feature_proxy_loss: zero at a perfect refinement, gradient checks out") {
  Rng rng(12);
  Mat s = random_mat(4, 9, rng, 0.5, 2.0);
  MelConfig mel;
  mel.n_mels = 5;
  Mat fb = mel_filterbank(mel, 9, 16, 16000);

  FeatureProxyResult zero = feature_proxy_loss(s, s, fb, mel.floor_value);
  CHECK(zero.loss == 0.0);
  CHECK(zero.d_s_tilde.cwiseAbs().maxCoeff() == 0.0);

  Mat s_tilde = random_mat(4, 9, rng, 0.5, 2.0);
  FeatureProxyResult res = feature_proxy_loss(s_tilde, s, fb, mel.floor_value);
  CHECK(res.loss > 0.0);
  auto loss = [&] { return feature_proxy_loss(s_tilde, s, fb, mel.floor_value).loss; };
  CHECK(rel_err(res.d_s_tilde, fd_gradient(s_tilde, loss)) < 1e-7);
}

TEST_CASE("feature_proxy_loss: clamp kills gradients of negative refined entries") {
  Rng rng(13);
  Mat s = random_mat(2, 9, rng, 0.5, 1.5);
  Mat s_tilde = random_mat(2, 9, rng, 0.5, 1.5);
  s_tilde(0, 0) = -0.4;
  MelConfig mel;
  mel.n_mels = 4;
  Mat fb = mel_filterbank(mel, 9, 16, 16000);
  FeatureProxyResult res = feature_proxy_loss(s_tilde, s, fb, mel.floor_value);
  CHECK(res.d_s_tilde(0, 0) == 0.0);
}
