#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "flowda/autodiff.hpp"
#include "flowda/core.hpp"
#include "flowda/params.hpp"
#include "flowda/rng.hpp"

namespace flowda {

// Toy two-frame flow network: a shared 3-level stride-2 encoder to 1/8
// resolution, local correlation around the current estimate, and a small
// conv-GRU refiner, bilinearly upsampled back to full resolution. Well under
// one million parameters.
struct FlowNetConfig {
  int feature_channels = 32;
  int correlation_radius = 3;
  int refinement_iterations = 4;
  std::uint64_t init_seed = 0x5eed;

  void validate() const {
    require(feature_channels >= 8 && feature_channels % 4 == 0, "FlowNetConfig: feature_channels must be >= 8, divisible by 4");
    require(correlation_radius >= 1, "FlowNetConfig: correlation_radius must be >= 1");
    require(refinement_iterations >= 1, "FlowNetConfig: refinement_iterations must be >= 1");
  }
};

using LeafMap = std::map<std::string, ad::Var>;

class FlowNet {
 public:
  static constexpr int kDownscale = 8;
  static constexpr int kMinSize = 8;

  explicit FlowNet(FlowNetConfig cfg = {}) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(cfg_.init_seed);
    const int fc = cfg_.feature_channels;
    const int c1 = fc / 2, c2 = 3 * fc / 4;
    const int corr = (2 * cfg_.correlation_radius + 1) * (2 * cfg_.correlation_radius + 1);
    add_conv(rng, "enc1", 3, 3, c1, /*relu_gain=*/true);
    add_conv(rng, "enc2", 3, c1, c2, true);
    add_conv(rng, "enc3", 3, c2, fc, false);
    add_conv(rng, "xproj", 1, corr + 2 + fc, fc, true);
    add_conv(rng, "gru_z", 3, 2 * fc, fc, false);
    add_conv(rng, "gru_r", 3, 2 * fc, fc, false);
    add_conv(rng, "gru_q", 3, 2 * fc, fc, false);
    add_conv(rng, "head1", 3, fc, fc, true);
    add_conv(rng, "head2", 3, fc, 2, false);
    // Zero-initialized flow head: the first prediction is exactly zero flow.
    for (auto& v : params_.get("head2.weight").x) v = 0.0;
  }

  const FlowNetConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Differentiable forward pass. Parameter leaves are created on `tape`
  // (requiring gradients when the tape records them) and reported through
  // `leaves` so callers can read parameter gradients after backward().
  ad::Var forward(ad::Tape& tape, const Image& i1, const Image& i2, LeafMap* leaves = nullptr) const {
    return forward_with(tape, params_, cfg_, i1, i2, leaves);
  }

  static ad::Var forward_with(ad::Tape& tape, const ParamStore& params, const FlowNetConfig& cfg, const Image& i1,
                              const Image& i2, LeafMap* leaves = nullptr) {
    using namespace ad;
    cfg.validate();
    require_same_shape(i1, i2, "FlowNet::forward");
    require(i1.h >= kMinSize && i1.w >= kMinSize, "FlowNet::forward: image smaller than minimum size 8");
    require(i1.c == 3, "FlowNet::forward: 3-channel images expected");

    const int h = i1.h, w = i1.w;
    const int hp = ((h + kDownscale - 1) / kDownscale) * kDownscale;
    const int wp = ((w + kDownscale - 1) / kDownscale) * kDownscale;

    LeafMap local;
    LeafMap& lv = leaves ? *leaves : local;
    for (const auto& [name, t] : params) lv.emplace(name, tape.leaf(t, true));

    Var x1 = tape.constant(normalized(i1, hp, wp));
    Var x2 = tape.constant(normalized(i2, hp, wp));

    auto conv = [&](Var x, const std::string& name, int stride) {
      return conv2d(x, lv.at(name + ".weight"), lv.at(name + ".bias"), stride);
    };
    auto encode = [&](Var x) {
      Var a = relu(conv(x, "enc1", 2));
      Var b = relu(conv(a, "enc2", 2));
      return conv(b, "enc3", 2);
    };

    Var f1 = encode(x1);
    Var f2 = encode(x2);
    Var ctx = f1;
    Var hidden = tanh(f1);

    const int hl = hp / kDownscale, wl = wp / kDownscale;
    Var flow8 = tape.constant(Tensor({hl, wl, 2}));
    for (int iter = 0; iter < cfg.refinement_iterations; ++iter) {
      Var corr = local_correlation(f1, f2, flow8, cfg.correlation_radius);
      Var xin = relu(conv(concat_c({corr, flow8, ctx}), "xproj", 1));
      Var hx = concat_c({hidden, xin});
      Var z = sigmoid(conv(hx, "gru_z", 1));
      Var r = sigmoid(conv(hx, "gru_r", 1));
      Var q = tanh(conv(concat_c({mul(r, hidden), xin}), "gru_q", 1));
      hidden = add(mul(rsub(z, 1.0), hidden), mul(z, q));
      Var delta = conv(relu(conv(hidden, "head1", 1)), "head2", 1);
      flow8 = add(flow8, delta);
    }

    Var flow_full = scale(upsample_bilinear(flow8, kDownscale), static_cast<double>(kDownscale));
    if (hp != h || wp != w) flow_full = slice_hw(flow_full, 0, 0, h, w);
    return flow_full;
  }

  // Inference convenience: no tape bookkeeping, bitwise deterministic.
  FlowField predict(const Image& i1, const Image& i2) const { return predict_with(params_, cfg_, i1, i2); }

  static FlowField predict_with(const ParamStore& params, const FlowNetConfig& cfg, const Image& i1, const Image& i2) {
    ad::Tape tape(false);
    return ad::to_flow(tape.value(forward_with(tape, params, cfg, i1, i2)));
  }

 private:
  void add_conv(Rng& rng, const std::string& name, int k, int ci, int co, bool relu_gain) {
    ad::Tensor weight({k, k, ci, co});
    const double gain = relu_gain ? 2.0 : 1.0;
    const double stddev = std::sqrt(gain / (k * k * ci));
    for (auto& v : weight.x) v = rng.normal() * stddev;
    params_.add(name + ".weight", std::move(weight));
    params_.add(name + ".bias", ad::Tensor({co}));
  }

  // [0,1] -> [-1,1], edge-replicated to the padded size.
  static ad::Tensor normalized(const Image& img, int hp, int wp) {
    ad::Tensor out({hp, wp, img.c});
    for (int y = 0; y < hp; ++y) {
      const int sy = y < img.h ? y : img.h - 1;
      for (int x = 0; x < wp; ++x) {
        const int sx = x < img.w ? x : img.w - 1;
        for (int ch = 0; ch < img.c; ++ch)
          out.x[(static_cast<std::size_t>(y) * wp + x) * img.c + ch] = 2.0 * img.at(sy, sx, ch) - 1.0;
      }
    }
    return out;
  }

  FlowNetConfig cfg_;
  ParamStore params_;
};

}  // namespace flowda
