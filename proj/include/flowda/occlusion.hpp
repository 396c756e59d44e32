#pragma once

#include <cmath>

#include "flowda/core.hpp"

namespace flowda {

struct OcclusionConfig {
  double alpha1 = 0.01;  // relative threshold
  double alpha2 = 0.5;   // absolute threshold, px^2

  void validate() const { require(alpha1 >= 0.0 && alpha2 >= 0.0, "OcclusionConfig: thresholds must be >= 0"); }
};

// Forward-backward consistency occlusion check. A pixel is visible (1) when
// the backward flow sampled at its forward target nearly cancels the forward
// flow: ||f + b||^2 < alpha1 * (||f||^2 + ||b||^2) + alpha2. Pixels whose
// forward target leaves the frame are occluded. Non-differentiable by
// contract; it only ever gates losses.
inline BinaryMask fb_occlusion(const FlowField& flow_fwd, const FlowField& flow_bwd, const OcclusionConfig& cfg = {}) {
  cfg.validate();
  require_same_shape(flow_fwd, flow_bwd, "fb_occlusion");
  const int h = flow_fwd.h, w = flow_fwd.w;
  BinaryMask mask(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double fu = flow_fwd.u(y, x);
      const double fv = flow_fwd.v(y, x);
      const double tx = x + fu;
      const double ty = y + fv;
      if (tx < 0.0 || tx > w - 1 || ty < 0.0 || ty > h - 1) {
        mask.at(y, x) = 0;
        continue;
      }
      const int x0 = std::min(static_cast<int>(std::floor(tx)), w - 1);
      const int y0 = std::min(static_cast<int>(std::floor(ty)), h - 1);
      const int x1 = std::min(x0 + 1, w - 1);
      const int y1 = std::min(y0 + 1, h - 1);
      const double fx = tx - x0;
      const double fy = ty - y0;
      const double bu = (1 - fy) * ((1 - fx) * flow_bwd.u(y0, x0) + fx * flow_bwd.u(y0, x1)) +
                        fy * ((1 - fx) * flow_bwd.u(y1, x0) + fx * flow_bwd.u(y1, x1));
      const double bv = (1 - fy) * ((1 - fx) * flow_bwd.v(y0, x0) + fx * flow_bwd.v(y0, x1)) +
                        fy * ((1 - fx) * flow_bwd.v(y1, x0) + fx * flow_bwd.v(y1, x1));
      const double mismatch = (fu + bu) * (fu + bu) + (fv + bv) * (fv + bv);
      const double budget = cfg.alpha1 * (fu * fu + fv * fv + bu * bu + bv * bv) + cfg.alpha2;
      mask.at(y, x) = mismatch < budget ? 1 : 0;
    }
  }
  return mask;
}

}  // namespace flowda
