#pragma once

#include <cmath>

#include "flowda/core.hpp"

namespace flowda {

// Per-pixel end point error: sqrt((u_p-u_g)^2 + (v_p-v_g)^2).
inline EpeMap epe_map(const FlowField& pred, const FlowField& gt) {
  require_same_shape(pred, gt, "epe_map");
  EpeMap out(pred.h, pred.w);
  for (int y = 0; y < pred.h; ++y) {
    for (int x = 0; x < pred.w; ++x) {
      const double du = pred.u(y, x) - gt.u(y, x);
      const double dv = pred.v(y, x) - gt.v(y, x);
      out.at(y, x) = std::sqrt(du * du + dv * dv);
    }
  }
  return out;
}

// Mean EPE over valid == 1 pixels. Rejects an all-zero mask: an empty
// evaluation region has no mean.
inline double mean_epe(const FlowField& pred, const FlowField& gt, const BinaryMask& valid) {
  require_same_shape(pred, gt, "mean_epe");
  require_same_shape(pred, valid, "mean_epe");
  const EpeMap epe = epe_map(pred, gt);
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < pred.h; ++y) {
    for (int x = 0; x < pred.w; ++x) {
      if (valid.at(y, x)) {
        sum += epe.at(y, x);
        ++n;
      }
    }
  }
  require(n > 0, "mean_epe: empty evaluation region (valid mask has no ones)");
  return sum / static_cast<double>(n);
}

// KITTI outlier percentage: a valid pixel is an outlier when its EPE exceeds
// both 3 px and 5% of the ground-truth flow magnitude.
inline double fl_all(const FlowField& pred, const FlowField& gt, const BinaryMask& valid) {
  require_same_shape(pred, gt, "fl_all");
  require_same_shape(pred, valid, "fl_all");
  const EpeMap epe = epe_map(pred, gt);
  std::size_t outliers = 0, n = 0;
  for (int y = 0; y < pred.h; ++y) {
    for (int x = 0; x < pred.w; ++x) {
      if (!valid.at(y, x)) continue;
      ++n;
      const double e = epe.at(y, x);
      const double mag = std::sqrt(gt.u(y, x) * gt.u(y, x) + gt.v(y, x) * gt.v(y, x));
      if (e > 3.0 && e > 0.05 * mag) ++outliers;
    }
  }
  require(n > 0, "fl_all: empty evaluation region (valid mask has no ones)");
  return 100.0 * static_cast<double>(outliers) / static_cast<double>(n);
}

}  // namespace flowda
