#pragma once

#include <cmath>

#include "flowda/autodiff.hpp"
#include "flowda/core.hpp"

namespace flowda {

struct SmoothLossConfig {
  double edge_weight = 150.0;

  void validate() const { require(edge_weight > 0.0, "SmoothLossConfig: edge_weight must be positive"); }
};

// First-order edge-aware smoothness: for each direction d in {x, y}, the
// flow-gradient magnitude |d u| + |d v| weighted by exp(-edge_weight *
// mean_c |d I1|), averaged over all finite-difference positions of both
// directions. The image enters only through the constant weights, so
// gradients flow to the flow field alone.
inline ad::Var smoothness_loss(ad::Var flow, const ad::Tensor& image1, const SmoothLossConfig& cfg = {}) {
  using namespace ad;
  cfg.validate();
  Tape& tape = *flow.tape;
  const Tensor& vf = tape.value(flow);
  require(vf.rank() == 3 && vf.dim(2) == 2, "smoothness_loss: (H,W,2) flow expected");
  require(image1.rank() == 3 && image1.dim(0) == vf.dim(0) && image1.dim(1) == vf.dim(1),
          "smoothness_loss: image shape mismatch");
  const int h = vf.dim(0), w = vf.dim(1), c = image1.dim(2);

  Tensor wx({h, w - 1, 1});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x + 1 < w; ++x) {
      double grad = 0.0;
      for (int ch = 0; ch < c; ++ch)
        grad += std::fabs(image1.x[(static_cast<std::size_t>(y) * w + x + 1) * c + ch] -
                          image1.x[(static_cast<std::size_t>(y) * w + x) * c + ch]);
      wx.x[static_cast<std::size_t>(y) * (w - 1) + x] = std::exp(-cfg.edge_weight * grad / c);
    }
  Tensor wy({h - 1, w, 1});
  for (int y = 0; y + 1 < h; ++y)
    for (int x = 0; x < w; ++x) {
      double grad = 0.0;
      for (int ch = 0; ch < c; ++ch)
        grad += std::fabs(image1.x[(static_cast<std::size_t>(y + 1) * w + x) * c + ch] -
                          image1.x[(static_cast<std::size_t>(y) * w + x) * c + ch]);
      wy.x[static_cast<std::size_t>(y) * w + x] = std::exp(-cfg.edge_weight * grad / c);
    }

  Var term_x = channel_sum(abs(fdiff_x(flow)));  // |d_x u| + |d_x v|
  Var term_y = channel_sum(abs(fdiff_y(flow)));
  Var total = add(weighted_sum(term_x, wx), weighted_sum(term_y, wy));
  const double positions = static_cast<double>(h) * (w - 1) + static_cast<double>(h - 1) * w;
  return scale(total, 1.0 / positions);
}

inline ad::Var smoothness_loss(ad::Var flow, const Image& image1, const SmoothLossConfig& cfg = {}) {
  return smoothness_loss(flow, ad::from_image(image1), cfg);
}

inline double smoothness_loss_value(const FlowField& flow, const Image& image1, const SmoothLossConfig& cfg = {}) {
  ad::Tape tape(false);
  ad::Var f = tape.constant(ad::from_flow(flow));
  return tape.value(smoothness_loss(f, image1, cfg)).x[0];
}

}  // namespace flowda
