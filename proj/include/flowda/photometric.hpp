#pragma once

#include <cmath>

#include "flowda/autodiff.hpp"
#include "flowda/core.hpp"
#include "flowda/log.hpp"
#include "flowda/warp.hpp"

namespace flowda {

struct PhotoLossConfig {
  double ssim_weight = 0.85;
  double l1_weight = 0.15;
  int ssim_window = 7;
  double ssim_c1 = 1e-4;
  double ssim_c2 = 9e-4;

  void validate() const {
    require(ssim_weight >= 0.0 && l1_weight >= 0.0, "PhotoLossConfig: weights must be non-negative");
    require(std::fabs(ssim_weight + l1_weight - 1.0) < 1e-12, "PhotoLossConfig: ssim_weight + l1_weight must equal 1");
    require(ssim_window >= 3 && ssim_window % 2 == 1, "PhotoLossConfig: window must be odd and >= 3");
    require(ssim_c1 > 0.0 && ssim_c2 > 0.0, "PhotoLossConfig: stabilizers must be positive");
  }
};

namespace detail {

// Per-pixel, per-channel SSIM map between two images over uniform box
// windows. Equals 1 exactly on identical patches since the stabilized
// numerator and denominator coincide.
inline ad::Var ssim_map(ad::Var a, ad::Var b, const PhotoLossConfig& cfg) {
  using namespace ad;
  const int k = cfg.ssim_window;
  Var mu_a = box_mean(a, k);
  Var mu_b = box_mean(b, k);
  Var mu_aa = square(mu_a);
  Var mu_bb = square(mu_b);
  Var mu_ab = mul(mu_a, mu_b);
  Var sigma_a = sub(box_mean(square(a), k), mu_aa);
  Var sigma_b = sub(box_mean(square(b), k), mu_bb);
  Var sigma_ab = sub(box_mean(mul(a, b), k), mu_ab);
  Var num = mul(offset(scale(mu_ab, 2.0), cfg.ssim_c1), offset(scale(sigma_ab, 2.0), cfg.ssim_c2));
  Var den = mul(offset(add(mu_aa, mu_bb), cfg.ssim_c1), offset(add(sigma_a, sigma_b), cfg.ssim_c2));
  return div(num, den);
}

}  // namespace detail

// SSIM + L1 photometric consistency between I1 and I2 warped back by `flow`,
// averaged over {occ == 1 AND in_bounds == 1}. An empty effective mask is a
// legitimate outcome on tiny crops: the loss is zero and a warning is logged.
inline ad::Var photometric_loss(ad::Var i1, ad::Var i2, ad::Var flow, const BinaryMask& occ,
                                const PhotoLossConfig& cfg = {}) {
  using namespace ad;
  cfg.validate();
  Tape& tape = *i1.tape;
  const Tensor& v1 = tape.value(i1);
  require(v1.rank() == 3, "photometric_loss: rank-3 images expected");
  require(v1.same_shape(tape.value(i2)), "photometric_loss: image shapes differ");
  require(v1.dim(0) == occ.h && v1.dim(1) == occ.w, "photometric_loss: occlusion mask shape mismatch");
  require(occ.count_ones() > 0, "photometric_loss: occlusion mask has no visible pixels");

  WarpResult warp = backward_warp(i2, flow);

  Tensor effective({occ.h, occ.w, 1});
  double count = 0.0;
  for (int y = 0; y < occ.h; ++y)
    for (int x = 0; x < occ.w; ++x) {
      const double m = (occ.at(y, x) && warp.in_bounds.at(y, x)) ? 1.0 : 0.0;
      effective.x[static_cast<std::size_t>(y) * occ.w + x] = m;
      count += m;
    }
  if (count == 0.0) {
    log::warn("photometric_loss: effective mask empty (all visible pixels sample out of frame); returning 0");
    return tape.constant_scalar(0.0);
  }

  Var dssim = scale(sub_from_const(Tensor({occ.h, occ.w, 1}, 1.0), channel_mean(flowda::detail::ssim_map(i1, warp.warped, cfg))), 0.5);
  Var l1 = channel_mean(abs(sub(i1, warp.warped)));
  Var per_pixel = add(scale(dssim, cfg.ssim_weight), scale(l1, cfg.l1_weight));
  return scale(weighted_sum(per_pixel, effective), 1.0 / count);
}

// Convenience wrapper on plain values: images constant, flow a leaf.
inline double photometric_loss_value(const Image& i1, const Image& i2, const FlowField& flow, const BinaryMask& occ,
                                     const PhotoLossConfig& cfg = {}) {
  ad::Tape tape(false);
  ad::Var a = tape.constant(ad::from_image(i1));
  ad::Var b = tape.constant(ad::from_image(i2));
  ad::Var f = tape.constant(ad::from_flow(flow));
  return tape.value(photometric_loss(a, b, f, occ, cfg)).x[0];
}

}  // namespace flowda
