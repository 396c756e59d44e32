#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "flowda/errors.hpp"

namespace flowda {

// H x W x C image, row-major, channel-interleaved, values in [0, 1].
struct Image {
  int h = 0, w = 0, c = 0;
  std::vector<double> data;

  Image() = default;
  Image(int height, int width, int channels, double fill = 0.0)
      : h(height), w(width), c(channels), data(static_cast<std::size_t>(height) * width * channels, fill) {
    require(height > 0 && width > 0 && (channels == 1 || channels == 3), "Image: bad dimensions");
  }

  double& at(int y, int x, int ch) { return data[(static_cast<std::size_t>(y) * w + x) * c + ch]; }
  double at(int y, int x, int ch) const { return data[(static_cast<std::size_t>(y) * w + x) * c + ch]; }
  std::size_t size() const { return data.size(); }

  // Full invariant check; call at module boundaries fed by external input.
  void validate() const {
    require(h >= 8 && w >= 8, "Image: height and width must be >= 8");
    require(c == 1 || c == 3, "Image: channel count must be 1 or 3");
    require(data.size() == static_cast<std::size_t>(h) * w * c, "Image: storage size mismatch");
    for (double v : data) require(std::isfinite(v) && v >= 0.0 && v <= 1.0, "Image: values must be finite in [0,1]");
  }
};

// H x W x 2 displacement field in pixels. Channel 0 is u (+x, right),
// channel 1 is v (+y, down): pixel (x, y) in frame 1 maps to (x+u, y+v).
struct FlowField {
  int h = 0, w = 0;
  std::vector<double> data;

  FlowField() = default;
  FlowField(int height, int width, double fill_u = 0.0, double fill_v = 0.0)
      : h(height), w(width), data(static_cast<std::size_t>(height) * width * 2) {
    require(height > 0 && width > 0, "FlowField: bad dimensions");
    for (std::size_t i = 0; i < data.size(); i += 2) {
      data[i] = fill_u;
      data[i + 1] = fill_v;
    }
  }

  double& u(int y, int x) { return data[(static_cast<std::size_t>(y) * w + x) * 2]; }
  double u(int y, int x) const { return data[(static_cast<std::size_t>(y) * w + x) * 2]; }
  double& v(int y, int x) { return data[(static_cast<std::size_t>(y) * w + x) * 2 + 1]; }
  double v(int y, int x) const { return data[(static_cast<std::size_t>(y) * w + x) * 2 + 1]; }

  void validate() const {
    require(data.size() == static_cast<std::size_t>(h) * w * 2, "FlowField: storage size mismatch");
    for (double v : data) require(std::isfinite(v), "FlowField: values must be finite");
  }
};

// H x W mask with values in {0, 1}. Semantics depend on use: occlusion mask
// (1 = visible), ACW weight mask (1 = low learning difficulty), validity
// mask (1 = ground truth defined).
struct BinaryMask {
  int h = 0, w = 0;
  std::vector<std::uint8_t> data;

  BinaryMask() = default;
  BinaryMask(int height, int width, std::uint8_t fill = 0)
      : h(height), w(width), data(static_cast<std::size_t>(height) * width, fill) {
    require(height > 0 && width > 0, "BinaryMask: bad dimensions");
    require(fill == 0 || fill == 1, "BinaryMask: fill must be 0 or 1");
  }

  static BinaryMask ones(int height, int width) { return BinaryMask(height, width, 1); }
  static BinaryMask zeros(int height, int width) { return BinaryMask(height, width, 0); }

  std::uint8_t& at(int y, int x) { return data[static_cast<std::size_t>(y) * w + x]; }
  std::uint8_t at(int y, int x) const { return data[static_cast<std::size_t>(y) * w + x]; }

  std::size_t count_ones() const {
    std::size_t n = 0;
    for (auto v : data) n += v;
    return n;
  }

  void validate() const {
    require(data.size() == static_cast<std::size_t>(h) * w, "BinaryMask: storage size mismatch");
    for (auto v : data) require(v == 0 || v == 1, "BinaryMask: values must be 0 or 1");
  }
};

// H x W map of non-negative per-pixel end point errors, in pixels.
struct EpeMap {
  int h = 0, w = 0;
  std::vector<double> data;

  EpeMap() = default;
  EpeMap(int height, int width, double fill = 0.0)
      : h(height), w(width), data(static_cast<std::size_t>(height) * width, fill) {
    require(height > 0 && width > 0, "EpeMap: bad dimensions");
  }

  double& at(int y, int x) { return data[static_cast<std::size_t>(y) * w + x]; }
  double at(int y, int x) const { return data[static_cast<std::size_t>(y) * w + x]; }

  void validate() const {
    require(data.size() == static_cast<std::size_t>(h) * w, "EpeMap: storage size mismatch");
    for (double v : data) require(std::isfinite(v) && v >= 0.0, "EpeMap: values must be finite and >= 0");
  }
};

inline void require_same_shape(const FlowField& a, const FlowField& b, const std::string& op) {
  require(a.h == b.h && a.w == b.w, op + ": flow field shapes differ");
}

inline void require_same_shape(const FlowField& a, const BinaryMask& m, const std::string& op) {
  require(a.h == m.h && a.w == m.w, op + ": mask shape does not match flow field");
}

inline void require_same_shape(const Image& a, const Image& b, const std::string& op) {
  require(a.h == b.h && a.w == b.w && a.c == b.c, op + ": image shapes differ");
}

inline void require_same_shape(const Image& a, const FlowField& f, const std::string& op) {
  require(a.h == f.h && a.w == f.w, op + ": flow field shape does not match image");
}

inline void require_same_shape(const Image& a, const BinaryMask& m, const std::string& op) {
  require(a.h == m.h && a.w == m.w, op + ": mask shape does not match image");
}

}  // namespace flowda
