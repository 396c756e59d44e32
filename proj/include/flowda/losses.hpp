#pragma once

#include <cmath>

#include "flowda/autodiff.hpp"
#include "flowda/core.hpp"
#include "flowda/log.hpp"
#include "flowda/photometric.hpp"
#include "flowda/smoothness.hpp"

namespace flowda {

struct LossWeights {
  double eps1 = 0.9;   // low-difficulty region weight
  double eps2 = 0.1;   // high-difficulty region weight
  double alpha = 1.0;  // supervised term
  double beta = 1.0;   // adaptation term
  double gamma = 1.0;  // unsupervised term

  void validate() const {
    require(eps1 >= 0.0 && eps2 >= 0.0 && alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0,
            "LossWeights: all weights must be >= 0");
  }
};

// Per-step scalar record; l_total always equals the exact composition
// alpha*l_s + beta*l_a + gamma*l_u of the reported components.
struct LossReport {
  double l_s = 0.0;
  double l_a = 0.0;
  double l_u = 0.0;
  double l_total = 0.0;
  double masked_fraction_source = 0.0;
  double masked_fraction_target = 0.0;
  double occluded_fraction = 0.0;

  bool finite() const {
    return std::isfinite(l_s) && std::isfinite(l_a) && std::isfinite(l_u) && std::isfinite(l_total);
  }
};

namespace detail {

// Per-pixel L1 over the two flow channels: |du| + |dv|, as an (H, W, 1) map.
inline ad::Var flow_l1_map(ad::Var pred, const ad::Tensor& target) {
  return ad::channel_sum(ad::abs(ad::sub(pred, pred.tape->constant(target))));
}

}  // namespace detail

// Curriculum-weighted supervised loss: mean over valid pixels of
// [eps1*M + eps2*(1-M)] .* L1(pred, gt). Differentiable w.r.t. `pred` only;
// the ground truth enters as a constant.
inline ad::Var supervised_loss(ad::Var pred, const ad::Tensor& gt, const BinaryMask& m_low, const BinaryMask& valid,
                               const LossWeights& w = {}) {
  using namespace ad;
  w.validate();
  Tape& tape = *pred.tape;
  const Tensor& vp = tape.value(pred);
  require(vp.rank() == 3 && vp.dim(2) == 2, "supervised_loss: (H,W,2) prediction expected");
  require(vp.same_shape(gt), "supervised_loss: ground-truth shape mismatch");
  const int h = vp.dim(0), wd = vp.dim(1);
  require(m_low.h == h && m_low.w == wd && valid.h == h && valid.w == wd, "supervised_loss: mask shape mismatch");
  const std::size_t n_valid = valid.count_ones();
  require(n_valid > 0, "supervised_loss: validity mask has no ones");

  Tensor weights({h, wd, 1});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < wd; ++x)
      weights.x[static_cast<std::size_t>(y) * wd + x] =
          valid.at(y, x) ? (m_low.at(y, x) ? w.eps1 : w.eps2) : 0.0;

  Var l1 = flowda::detail::flow_l1_map(pred, gt);
  return scale(weighted_sum(l1, weights), 1.0 / static_cast<double>(n_valid));
}

// Adaptation loss against a teacher pseudo-label: mean over all pixels of
// O .* [eps1*M + eps2*(1-M)] .* L1(pred, pseudo). The pseudo-label is a
// constant (no gradient ever reaches it) and occluded pixels contribute zero
// loss and zero gradient. The mean is over all pixels, not renormalized over
// the visible set, so the loss scale is stable as occlusion varies.
inline ad::Var adaptation_loss(ad::Var pred, const ad::Tensor& pseudo, const BinaryMask& occ, const BinaryMask& m_low,
                               const LossWeights& w = {}) {
  using namespace ad;
  w.validate();
  Tape& tape = *pred.tape;
  const Tensor& vp = tape.value(pred);
  require(vp.rank() == 3 && vp.dim(2) == 2, "adaptation_loss: (H,W,2) prediction expected");
  require(vp.same_shape(pseudo), "adaptation_loss: pseudo-label shape mismatch");
  const int h = vp.dim(0), wd = vp.dim(1);
  require(occ.h == h && occ.w == wd && m_low.h == h && m_low.w == wd, "adaptation_loss: mask shape mismatch");
  if (occ.count_ones() == 0)
    log::warn("adaptation_loss: occlusion mask is all-occluded; loss is zero this step");

  Tensor weights({h, wd, 1});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < wd; ++x)
      weights.x[static_cast<std::size_t>(y) * wd + x] =
          occ.at(y, x) ? (m_low.at(y, x) ? w.eps1 : w.eps2) : 0.0;

  Var l1 = flowda::detail::flow_l1_map(pred, pseudo);
  return scale(weighted_sum(l1, weights), 1.0 / static_cast<double>(h * wd));
}

// Unsupervised loss: edge-aware smoothness plus occlusion-gated photometric
// consistency.
inline ad::Var unsupervised_loss(ad::Var i1, ad::Var i2, ad::Var flow, const BinaryMask& occ,
                                 const PhotoLossConfig& photo_cfg = {}, const SmoothLossConfig& smooth_cfg = {}) {
  ad::Var smooth = smoothness_loss(flow, flow.tape->value(i1), smooth_cfg);
  ad::Var photo = photometric_loss(i1, i2, flow, occ, photo_cfg);
  return ad::add(smooth, photo);
}

inline double total_loss(double l_s, double l_a, double l_u, const LossWeights& w = {}) {
  w.validate();
  return w.alpha * l_s + w.beta * l_a + w.gamma * l_u;
}

inline ad::Var total_loss(ad::Var l_s, ad::Var l_a, ad::Var l_u, const LossWeights& w = {}) {
  w.validate();
  return ad::add(ad::add(ad::scale(l_s, w.alpha), ad::scale(l_a, w.beta)), ad::scale(l_u, w.gamma));
}

}  // namespace flowda
