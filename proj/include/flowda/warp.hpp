#pragma once

#include "flowda/autodiff.hpp"
#include "flowda/core.hpp"

namespace flowda {

// 1 where the warp sample point (x+u, y+v) lies inside [0,W-1]x[0,H-1].
inline BinaryMask in_bounds_mask(const ad::Tensor& flow_value) {
  require(flow_value.rank() == 3 && flow_value.dim(2) == 2, "in_bounds_mask: (H,W,2) flow expected");
  const int h = flow_value.dim(0), w = flow_value.dim(1);
  BinaryMask mask(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t pi = static_cast<std::size_t>(y) * w + x;
      const double sx = x + flow_value.x[pi * 2];
      const double sy = y + flow_value.x[pi * 2 + 1];
      mask.at(y, x) = (sx >= 0.0 && sx <= w - 1 && sy >= 0.0 && sy <= h - 1) ? 1 : 0;
    }
  }
  return mask;
}

inline BinaryMask in_bounds_mask(const FlowField& flow) { return in_bounds_mask(ad::from_flow(flow)); }

struct WarpResult {
  ad::Var warped;
  BinaryMask in_bounds;
};

// Differentiable backward warp: warped[y][x] = bilinear sample of image2 at
// (x+u, y+v). Out-of-frame samples take edge-clamped values and are flagged
// 0 in `in_bounds` so losses can exclude them.
inline WarpResult backward_warp(ad::Var image2, ad::Var flow) {
  WarpResult result{ad::bilinear_sample(image2, flow), in_bounds_mask(flow.tape->value(flow))};
  return result;
}

// Plain-value convenience for non-differentiable callers.
inline Image backward_warp(const Image& image2, const FlowField& flow, BinaryMask* in_bounds = nullptr) {
  require_same_shape(image2, flow, "backward_warp");
  ad::Tape tape(false);
  ad::Var img = tape.constant(ad::from_image(image2));
  ad::Var f = tape.constant(ad::from_flow(flow));
  WarpResult r = backward_warp(img, f);
  if (in_bounds) *in_bounds = r.in_bounds;
  return ad::to_image(tape.value(r.warped));
}

}  // namespace flowda
