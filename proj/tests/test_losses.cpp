#include <gtest/gtest.h>

#include "flowda/losses.hpp"
#include "flowda/rng.hpp"
#include "test_util.hpp"

using namespace flowda;

namespace {

double supervised_value(const FlowField& pred, const FlowField& gt, const BinaryMask& m, const BinaryMask& valid,
                        const LossWeights& w = {}) {
  ad::Tape tape(false);
  ad::Var p = tape.constant(ad::from_flow(pred));
  return tape.value(supervised_loss(p, ad::from_flow(gt), m, valid, w)).x[0];
}

double adaptation_value(const FlowField& pred, const FlowField& pseudo, const BinaryMask& occ, const BinaryMask& m,
                        const LossWeights& w = {}) {
  ad::Tape tape(false);
  ad::Var p = tape.constant(ad::from_flow(pred));
  return tape.value(adaptation_loss(p, ad::from_flow(pseudo), occ, m, w)).x[0];
}

}  // namespace

TEST(SupervisedLoss, PerfectPredictionIsZero) {
  Rng rng(1);
  const FlowField f = testutil::random_flow(8, 8, 3.0, rng);
  EXPECT_DOUBLE_EQ(supervised_value(f, f, BinaryMask::ones(8, 8), BinaryMask::ones(8, 8)), 0.0);
}

TEST(SupervisedLoss, LowDifficultyWeightApplied) {
  // Constant per-pixel L1 = c with M all ones: loss = 0.9 * c.
  const double c = 1.5;  // |du| + |dv| = 1.0 + 0.5
  FlowField pred(6, 6, 1.0, 0.5);
  FlowField gt(6, 6);
  EXPECT_NEAR(supervised_value(pred, gt, BinaryMask::ones(6, 6), BinaryMask::ones(6, 6)), 0.9 * c, 1e-12);
}

TEST(SupervisedLoss, HighDifficultyWeightApplied) {
  const double c = 1.5;
  FlowField pred(6, 6, 1.0, 0.5);
  FlowField gt(6, 6);
  EXPECT_NEAR(supervised_value(pred, gt, BinaryMask::zeros(6, 6), BinaryMask::ones(6, 6)), 0.1 * c, 1e-12);
}

TEST(SupervisedLoss, PlainMeanL1WhenAcwDisabled) {
  // M all ones with eps1 = 1 recovers unweighted mean L1.
  Rng rng(2);
  const FlowField pred = testutil::random_flow(8, 8, 2.0, rng);
  const FlowField gt = testutil::random_flow(8, 8, 2.0, rng);
  LossWeights w;
  w.eps1 = 1.0;
  double mean_l1 = 0.0;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      mean_l1 += std::fabs(pred.u(y, x) - gt.u(y, x)) + std::fabs(pred.v(y, x) - gt.v(y, x));
  mean_l1 /= 64.0;
  EXPECT_NEAR(supervised_value(pred, gt, BinaryMask::ones(8, 8), BinaryMask::ones(8, 8), w), mean_l1, 1e-12);
}

TEST(SupervisedLoss, EmptyValidRejected) {
  FlowField f(4, 4);
  ad::Tape tape(false);
  ad::Var p = tape.constant(ad::from_flow(f));
  EXPECT_THROW(supervised_loss(p, ad::from_flow(f), BinaryMask::ones(4, 4), BinaryMask::zeros(4, 4), {}),
               InvalidArgument);
}

TEST(SupervisedLoss, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  const ad::Tensor pred0 = ad::from_flow(testutil::random_flow(8, 8, 2.0, rng));
  const ad::Tensor gt = ad::from_flow(testutil::random_flow(8, 8, 2.0, rng));
  const BinaryMask m = testutil::random_mask(8, 8, 0.5, rng);
  BinaryMask valid = testutil::random_mask(8, 8, 0.8, rng);
  valid.at(0, 0) = 1;

  ad::Tape tape;
  ad::Var p = tape.leaf(pred0, true);
  tape.backward(supervised_loss(p, gt, m, valid, {}));
  const ad::Tensor analytic = tape.grad(p);

  auto eval = [&](const ad::Tensor& probe) {
    ad::Tape t2(false);
    ad::Var q = t2.constant(probe);
    return t2.value(supervised_loss(q, gt, m, valid, {})).x[0];
  };
  EXPECT_LT(testutil::check_gradient(eval, pred0, analytic), 1e-3);
}

TEST(AdaptationLoss, PerfectPredictionIsZero) {
  Rng rng(4);
  const FlowField f = testutil::random_flow(8, 8, 3.0, rng);
  EXPECT_DOUBLE_EQ(adaptation_value(f, f, BinaryMask::ones(8, 8), BinaryMask::ones(8, 8)), 0.0);
}

TEST(AdaptationLoss, FullyOccludedIsZeroRegardlessOfFlows) {
  Rng rng(5);
  const FlowField pred = testutil::random_flow(8, 8, 5.0, rng);
  const FlowField pseudo = testutil::random_flow(8, 8, 5.0, rng);
  EXPECT_DOUBLE_EQ(adaptation_value(pred, pseudo, BinaryMask::zeros(8, 8), BinaryMask::ones(8, 8)), 0.0);
}

TEST(AdaptationLoss, ReducesToSupervisedFormWhenVisible) {
  const double c = 1.5;
  FlowField pred(6, 6, 1.0, 0.5);
  FlowField pseudo(6, 6);
  EXPECT_NEAR(adaptation_value(pred, pseudo, BinaryMask::ones(6, 6), BinaryMask::ones(6, 6)), 0.9 * c, 1e-12);
}

TEST(AdaptationLoss, OccludedPixelsGetNoGradient) {
  Rng rng(6);
  const ad::Tensor pred0 = ad::from_flow(testutil::random_flow(6, 6, 2.0, rng));
  const ad::Tensor pseudo = ad::from_flow(testutil::random_flow(6, 6, 2.0, rng));
  BinaryMask occ = BinaryMask::ones(6, 6);
  occ.at(2, 3) = 0;
  occ.at(4, 1) = 0;

  ad::Tape tape;
  ad::Var p = tape.leaf(pred0, true);
  tape.backward(adaptation_loss(p, pseudo, occ, BinaryMask::ones(6, 6), {}));
  const ad::Tensor g = tape.grad(p);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 6; ++x)
      if (!occ.at(y, x)) {
        EXPECT_DOUBLE_EQ(g.x[(static_cast<std::size_t>(y) * 6 + x) * 2], 0.0);
        EXPECT_DOUBLE_EQ(g.x[(static_cast<std::size_t>(y) * 6 + x) * 2 + 1], 0.0);
      }
}

TEST(AdaptationLoss, PseudoLabelIsConstantLeaf) {
  // A probe parameter that only influences the pseudo-label must receive
  // zero gradient: the label is detached by construction.
  Rng rng(7);
  ad::Tape tape;
  ad::Var probe = tape.leaf(ad::Tensor::scalar(2.0), true);
  // Build the pseudo-label tensor from the probe's *value* (detached).
  const double probe_value = tape.value(probe).x[0];
  FlowField pseudo(6, 6, probe_value, 0.0);
  const ad::Tensor pred0 = ad::from_flow(testutil::random_flow(6, 6, 2.0, rng));
  ad::Var p = tape.leaf(pred0, true);
  ad::Var loss = adaptation_loss(p, ad::from_flow(pseudo), BinaryMask::ones(6, 6), BinaryMask::ones(6, 6), {});
  // Loss also depends on probe only if gradient leaks; it must not.
  tape.backward(loss);
  EXPECT_DOUBLE_EQ(tape.grad(probe).x[0], 0.0);
  // Perturbing the probe's value does change the loss value (it is data)...
  FlowField pseudo2(6, 6, probe_value + 1.0, 0.0);
  ad::Tape t2(false);
  ad::Var q = t2.constant(pred0);
  const double l2 = t2.value(adaptation_loss(q, ad::from_flow(pseudo2), BinaryMask::ones(6, 6),
                                             BinaryMask::ones(6, 6), {}))
                        .x[0];
  EXPECT_NE(l2, tape.value(loss).x[0]);
}

TEST(AdaptationLoss, GradientMatchesFiniteDifferences) {
  Rng rng(8);
  const ad::Tensor pred0 = ad::from_flow(testutil::random_flow(8, 8, 2.0, rng));
  const ad::Tensor pseudo = ad::from_flow(testutil::random_flow(8, 8, 2.0, rng));
  const BinaryMask occ = testutil::random_mask(8, 8, 0.7, rng);
  const BinaryMask m = testutil::random_mask(8, 8, 0.5, rng);

  ad::Tape tape;
  ad::Var p = tape.leaf(pred0, true);
  tape.backward(adaptation_loss(p, pseudo, occ, m, {}));
  const ad::Tensor analytic = tape.grad(p);

  auto eval = [&](const ad::Tensor& probe) {
    ad::Tape t2(false);
    ad::Var q = t2.constant(probe);
    return t2.value(adaptation_loss(q, pseudo, occ, m, {})).x[0];
  };
  EXPECT_LT(testutil::check_gradient(eval, pred0, analytic), 1e-3);
}

TEST(UnsupervisedLoss, StaticIdenticalFramesZeroFlowIsZero) {
  Rng rng(9);
  const Image img = testutil::random_image(10, 10, 3, rng);
  ad::Tape tape(false);
  ad::Var a = tape.constant(ad::from_image(img));
  ad::Var f = tape.constant(ad::from_flow(FlowField(10, 10)));
  const double loss = tape.value(unsupervised_loss(a, a, f, BinaryMask::ones(10, 10))).x[0];
  EXPECT_NEAR(loss, 0.0, 1e-12);
}

TEST(UnsupervisedLoss, PerturbedFlowIsWorseThanCorrectFlow) {
  // Shifted pair: content moves 2 px right. Correct constant flow wins over
  // a perturbed one.
  Rng rng(10);
  const int h = 12, w = 16;
  const Image base = testutil::random_image(h, w, 3, rng);
  Image i2(h, w, 3, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 2; x < w; ++x)
      for (int c = 0; c < 3; ++c) i2.at(y, x, c) = base.at(y, x - 2, c);
  BinaryMask occ = BinaryMask::zeros(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x <= w - 6; ++x) occ.at(y, x) = 1;

  auto value_at = [&](const FlowField& flow) {
    ad::Tape tape(false);
    ad::Var a = tape.constant(ad::from_image(base));
    ad::Var b = tape.constant(ad::from_image(i2));
    ad::Var f = tape.constant(ad::from_flow(flow));
    return tape.value(unsupervised_loss(a, b, f, occ)).x[0];
  };
  const double correct = value_at(FlowField(h, w, 2.0, 0.0));
  FlowField perturbed(h, w, 2.0, 0.0);
  Rng prng(11);
  for (auto& v : perturbed.data) v += prng.uniform(-0.75, 0.75);
  EXPECT_LT(correct, value_at(perturbed));
}

TEST(TotalLoss, UnitWeightsSum) {
  EXPECT_DOUBLE_EQ(total_loss(1.0, 2.0, 3.0, {}), 6.0);
}

TEST(TotalLoss, BetaZeroDisablesAdaptation) {
  LossWeights w;
  w.beta = 0.0;
  EXPECT_DOUBLE_EQ(total_loss(1.0, 99.0, 3.0, w), 4.0);
}

TEST(TotalLoss, AllZero) {
  EXPECT_DOUBLE_EQ(total_loss(0.0, 0.0, 0.0, {}), 0.0);
}

TEST(TotalLoss, OnTapeCompositionMatchesScalarForm) {
  ad::Tape tape;
  ad::Var ls = tape.leaf(ad::Tensor::scalar(0.7), true);
  ad::Var la = tape.constant_scalar(0.2);
  ad::Var lu = tape.constant_scalar(0.4);
  LossWeights w;
  w.alpha = 1.5;
  w.beta = 0.5;
  w.gamma = 2.0;
  ad::Var total = total_loss(ls, la, lu, w);
  EXPECT_DOUBLE_EQ(tape.value(total).x[0], total_loss(0.7, 0.2, 0.4, w));
  tape.backward(total);
  EXPECT_DOUBLE_EQ(tape.grad(ls).x[0], 1.5);
}
