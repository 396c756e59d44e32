#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>

#include "flowda/core.hpp"
#include "flowda/rng.hpp"

namespace flowda {

// Crop parameters recorded at crop time; the single source of truth that
// aligns teacher pseudo-labels with student inputs.
struct CropWindow {
  int top = 0, left = 0, height = 0, width = 0;

  void validate_within(int h, int w) const {
    require(top >= 0 && left >= 0 && height > 0 && width > 0, "CropWindow: non-positive extent or negative origin");
    require(top + height <= h && left + width <= w, "CropWindow: window exceeds frame bounds");
  }
};

struct AugmentConfig {
  double brightness_range = 0.1;  // additive delta drawn from [-r, r]
  double contrast_range = 0.2;    // factor drawn from [1-r, 1+r]
  double saturation_range = 0.2;  // factor drawn from [1-r, 1+r]
  std::uint64_t seed = 0;

  void validate() const {
    require(brightness_range >= 0.0 && brightness_range <= 1.0, "AugmentConfig: brightness_range in [0,1]");
    require(contrast_range >= 0.0 && contrast_range < 1.0, "AugmentConfig: contrast_range in [0,1)");
    require(saturation_range >= 0.0 && saturation_range < 1.0, "AugmentConfig: saturation_range in [0,1)");
  }
};

namespace detail {
inline Image crop_image(const Image& src, const CropWindow& psi) {
  Image out(psi.height, psi.width, src.c);
  for (int y = 0; y < psi.height; ++y)
    for (int x = 0; x < psi.width; ++x)
      for (int ch = 0; ch < src.c; ++ch) out.at(y, x, ch) = src.at(psi.top + y, psi.left + x, ch);
  return out;
}
}  // namespace detail

struct CropResult {
  Image i1, i2;
  CropWindow psi;
};

// Crop both frames with one uniformly drawn window and record it.
inline CropResult random_crop(const Image& i1, const Image& i2, int crop_h, int crop_w, Rng& rng) {
  require_same_shape(i1, i2, "random_crop");
  require(crop_h > 0 && crop_w > 0 && crop_h <= i1.h && crop_w <= i1.w, "random_crop: crop larger than image");
  CropWindow psi;
  psi.height = crop_h;
  psi.width = crop_w;
  psi.top = rng.uniform_int(0, i1.h - crop_h);
  psi.left = rng.uniform_int(0, i1.w - crop_w);
  return CropResult{detail::crop_image(i1, psi), detail::crop_image(i2, psi), psi};
}

// Spatial slice of a pseudo-label and its occlusion mask. Flow vectors are
// displacements and therefore window-independent: only positions move.
inline std::pair<FlowField, BinaryMask> crop_label(const FlowField& flow, const BinaryMask& occ,
                                                   const CropWindow& psi) {
  require_same_shape(flow, occ, "crop_label");
  psi.validate_within(flow.h, flow.w);
  FlowField flow_c(psi.height, psi.width);
  BinaryMask occ_c(psi.height, psi.width);
  for (int y = 0; y < psi.height; ++y)
    for (int x = 0; x < psi.width; ++x) {
      flow_c.u(y, x) = flow.u(psi.top + y, psi.left + x);
      flow_c.v(y, x) = flow.v(psi.top + y, psi.left + x);
      occ_c.at(y, x) = occ.at(psi.top + y, psi.left + x);
    }
  return {std::move(flow_c), std::move(occ_c)};
}

// One draw of jitter parameters, shared by both frames of a pair.
struct PhotoParams {
  double brightness = 0.0;
  double contrast = 1.0;
  double saturation = 1.0;
};

inline PhotoParams draw_photo_params(const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  PhotoParams p;
  p.brightness = rng.uniform(-cfg.brightness_range, cfg.brightness_range);
  p.contrast = rng.uniform(1.0 - cfg.contrast_range, 1.0 + cfg.contrast_range);
  p.saturation = rng.uniform(1.0 - cfg.saturation_range, 1.0 + cfg.saturation_range);
  return p;
}

// Brightness/contrast/saturation jitter; purely photometric, geometry is
// untouched so flow labels stay valid. Output clamped to [0, 1].
inline void apply_photo_params(Image& image, const PhotoParams& p) {
  if (p.brightness == 0.0 && p.contrast == 1.0 && p.saturation == 1.0) return;
  for (int y = 0; y < image.h; ++y) {
    for (int x = 0; x < image.w; ++x) {
      double gray = 0.0;
      if (image.c == 3) {
        for (int ch = 0; ch < 3; ++ch) gray += image.at(y, x, ch);
        gray /= 3.0;
      }
      for (int ch = 0; ch < image.c; ++ch) {
        double v = image.at(y, x, ch);
        if (image.c == 3) v = gray + p.saturation * (v - gray);
        v = (v - 0.5) * p.contrast + 0.5;
        v += p.brightness;
        image.at(y, x, ch) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
}

// Jitter applied identically to both frames of a pair.
inline std::pair<Image, Image> photometric_augment(const Image& i1, const Image& i2, const AugmentConfig& cfg,
                                                   Rng& rng) {
  const PhotoParams p = draw_photo_params(cfg, rng);
  Image a = i1, b = i2;
  apply_photo_params(a, p);
  apply_photo_params(b, p);
  return {std::move(a), std::move(b)};
}

}  // namespace flowda
