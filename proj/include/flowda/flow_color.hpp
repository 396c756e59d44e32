#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "flowda/core.hpp"

namespace flowda {

namespace detail {

// Standard HSV -> RGB with h in [0, 1), s and v in [0, 1].
inline void hsv_to_rgb(double h, double s, double v, double rgb[3]) {
  const double hh = (h - std::floor(h)) * 6.0;
  const int sector = static_cast<int>(hh) % 6;
  const double f = hh - std::floor(hh);
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (sector) {
    case 0: rgb[0] = v; rgb[1] = t; rgb[2] = p; break;
    case 1: rgb[0] = q; rgb[1] = v; rgb[2] = p; break;
    case 2: rgb[0] = p; rgb[1] = v; rgb[2] = t; break;
    case 3: rgb[0] = p; rgb[1] = q; rgb[2] = v; break;
    case 4: rgb[0] = t; rgb[1] = p; rgb[2] = v; break;
    default: rgb[0] = v; rgb[1] = p; rgb[2] = q; break;
  }
}

}  // namespace detail

// Flow color wheel: hue = atan2(v, u), saturation proportional to magnitude
// clamped at max_magnitude (field maximum when unset), value = 1. Zero flow
// renders white; flow (m, 0) at the clamp renders the wheel's 0-radian hue
// (red) at full saturation.
inline Image flow_to_color(const FlowField& flow, std::optional<double> max_magnitude = std::nullopt) {
  double max_mag = max_magnitude.value_or(0.0);
  if (!max_magnitude) {
    for (int y = 0; y < flow.h; ++y)
      for (int x = 0; x < flow.w; ++x)
        max_mag = std::max(max_mag, std::hypot(flow.u(y, x), flow.v(y, x)));
  }
  if (max_mag <= 0.0) max_mag = 1.0;

  const double two_pi = 6.283185307179586476925286766559;
  Image out(flow.h, flow.w, 3);
  for (int y = 0; y < flow.h; ++y) {
    for (int x = 0; x < flow.w; ++x) {
      const double u = flow.u(y, x), v = flow.v(y, x);
      const double mag = std::hypot(u, v);
      double angle = std::atan2(v, u);
      if (angle < 0.0) angle += two_pi;
      const double hue = angle / two_pi;
      const double sat = std::min(mag / max_mag, 1.0);
      double rgb[3];
      detail::hsv_to_rgb(hue, sat, 1.0, rgb);
      for (int ch = 0; ch < 3; ++ch) out.at(y, x, ch) = rgb[ch];
    }
  }
  return out;
}

}  // namespace flowda
