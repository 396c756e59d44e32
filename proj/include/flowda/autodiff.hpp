#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <utility>
#include <vector>

#include "flowda/core.hpp"
#include "flowda/errors.hpp"

namespace flowda::ad {

// Dense row-major double tensor. Rank 3 tensors are (H, W, C) grids; rank 1
// and 4 appear as biases and convolution kernels.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> x;

  Tensor() = default;
  explicit Tensor(std::vector<int> s, double fill = 0.0) : shape(std::move(s)) {
    std::size_t n = 1;
    for (int d : shape) {
      require(d > 0, "Tensor: non-positive dimension");
      n *= static_cast<std::size_t>(d);
    }
    x.assign(n, fill);
  }

  static Tensor scalar(double v) {
    Tensor t(std::vector<int>{1});
    t.x[0] = v;
    return t;
  }

  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return x.size(); }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  double& operator[](std::size_t i) { return x[i]; }
  double operator[](std::size_t i) const { return x[i]; }
};

inline Tensor from_image(const Image& img) {
  Tensor t({img.h, img.w, img.c});
  t.x = img.data;
  return t;
}

inline Tensor from_flow(const FlowField& f) {
  Tensor t({f.h, f.w, 2});
  t.x = f.data;
  return t;
}

inline Tensor from_mask(const BinaryMask& m) {
  Tensor t({m.h, m.w, 1});
  for (std::size_t i = 0; i < m.data.size(); ++i) t.x[i] = m.data[i];
  return t;
}

inline Image to_image(const Tensor& t) {
  require(t.rank() == 3, "to_image: rank-3 tensor expected");
  Image img(t.dim(0), t.dim(1), t.dim(2));
  img.data = t.x;
  return img;
}

inline FlowField to_flow(const Tensor& t) {
  require(t.rank() == 3 && t.dim(2) == 2, "to_flow: HxWx2 tensor expected");
  FlowField f(t.dim(0), t.dim(1));
  f.data = t.x;
  return f;
}

class Tape;

// Handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
};

// Reverse-mode tape. Nodes store values eagerly; backward closures are only
// recorded when gradients are enabled and some parent needs them, so the
// same graph code doubles as a plain inference path.
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) { nodes_.reserve(256); }

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  Var leaf(Tensor value, bool requires_grad = false) {
    nodes_.push_back(Node{std::move(value), Tensor{}, grad_enabled_ && requires_grad, nullptr});
    return Var{this, static_cast<int>(nodes_.size()) - 1};
  }

  Var constant(Tensor value) { return leaf(std::move(value), false); }
  Var constant_scalar(double v) { return leaf(Tensor::scalar(v), false); }

  const Tensor& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }

  bool requires_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].needs_grad; }

  // Gradient accumulator for a node, allocated on first touch.
  Tensor& grad_accum(Var v) {
    Node& n = nodes_[static_cast<std::size_t>(v.id)];
    if (n.grad.size() == 0) n.grad = Tensor(n.value.shape);
    return n.grad;
  }

  // Gradient by value; zeros when the node was never reached.
  Tensor grad(Var v) const {
    const Node& n = nodes_[static_cast<std::size_t>(v.id)];
    if (n.grad.size() == 0) return Tensor(n.value.shape);
    return n.grad;
  }

  // Record a new node. `back` is invoked with the node's own id during the
  // reverse sweep; it reads grad via grad_of(self) and scatters into parents.
  Var emit(Tensor value, std::initializer_list<Var> parents, std::function<void(Tape&, int)> back) {
    bool needs_grad = false;
    if (grad_enabled_) {
      for (const Var& p : parents) {
        require(p.tape == this, "Tape::emit: parent from a different tape");
        if (nodes_[static_cast<std::size_t>(p.id)].needs_grad) needs_grad = true;
      }
    }
    Node node{std::move(value), Tensor{}, needs_grad, nullptr};
    if (needs_grad) node.back = std::move(back);
    nodes_.push_back(std::move(node));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
  }

  Var emit_multi(Tensor value, const std::vector<Var>& parents, std::function<void(Tape&, int)> back) {
    bool needs_grad = false;
    if (grad_enabled_) {
      for (const Var& p : parents) {
        require(p.tape == this, "Tape::emit_multi: parent from a different tape");
        if (nodes_[static_cast<std::size_t>(p.id)].needs_grad) needs_grad = true;
      }
    }
    Node node{std::move(value), Tensor{}, needs_grad, nullptr};
    if (needs_grad) node.back = std::move(back);
    nodes_.push_back(std::move(node));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
  }

  const Tensor& grad_of(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() == 0) n.grad = Tensor(n.value.shape);
    return n.grad;
  }

  bool has_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad.size() != 0; }

  // Reverse sweep seeded with d(loss)/d(loss) = 1.
  void backward(Var loss) {
    require(grad_enabled_, "Tape::backward: gradients are disabled on this tape");
    require(loss.tape == this, "Tape::backward: loss from a different tape");
    require(value(loss).size() == 1, "Tape::backward: loss must be scalar");
    grad_accum(loss).x[0] += 1.0;
    for (int id = loss.id; id >= 0; --id) {
      Node& n = nodes_[static_cast<std::size_t>(id)];
      if (!n.needs_grad || !n.back || n.grad.size() == 0) continue;
      n.back(*this, id);
    }
  }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    std::function<void(Tape&, int)> back;
  };
  std::vector<Node> nodes_;
  bool grad_enabled_;
};

namespace detail {
inline void require_same_tape(Var a, Var b, const char* op) {
  require(a.tape != nullptr && a.tape == b.tape, std::string(op) + ": vars must live on one tape");
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise ops
// ---------------------------------------------------------------------------

inline Var add(Var a, Var b) {
  detail::require_same_tape(a, b, "add");
  Tape& t = *a.tape;
  const Tensor& va = t.value(a);
  const Tensor& vb = t.value(b);
  require(va.same_shape(vb), "add: shape mismatch");
  Tensor out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.x[i] += vb.x[i];
  return t.emit(std::move(out), {a, b}, [a, b](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.x[i] += g.x[i];
    }
    if (tp.requires_grad(b)) {
      Tensor& gb = tp.grad_accum(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb.x[i] += g.x[i];
    }
  });
}

inline Var sub(Var a, Var b) {
  detail::require_same_tape(a, b, "sub");
  Tape& t = *a.tape;
  const Tensor& va = t.value(a);
  const Tensor& vb = t.value(b);
  require(va.same_shape(vb), "sub: shape mismatch");
  Tensor out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.x[i] -= vb.x[i];
  return t.emit(std::move(out), {a, b}, [a, b](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.x[i] += g.x[i];
    }
    if (tp.requires_grad(b)) {
      Tensor& gb = tp.grad_accum(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb.x[i] -= g.x[i];
    }
  });
}

inline Var mul(Var a, Var b) {
  detail::require_same_tape(a, b, "mul");
  Tape& t = *a.tape;
  const Tensor& va = t.value(a);
  const Tensor& vb = t.value(b);
  require(va.same_shape(vb), "mul: shape mismatch");
  Tensor out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.x[i] *= vb.x[i];
  return t.emit(std::move(out), {a, b}, [a, b](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    const Tensor& va2 = tp.value(a);
    const Tensor& vb2 = tp.value(b);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.x[i] += g.x[i] * vb2.x[i];
    }
    if (tp.requires_grad(b)) {
      Tensor& gb = tp.grad_accum(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb.x[i] += g.x[i] * va2.x[i];
    }
  });
}

inline Var div(Var a, Var b) {
  detail::require_same_tape(a, b, "div");
  Tape& t = *a.tape;
  const Tensor& va = t.value(a);
  const Tensor& vb = t.value(b);
  require(va.same_shape(vb), "div: shape mismatch");
  Tensor out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.x[i] /= vb.x[i];
  return t.emit(std::move(out), {a, b}, [a, b](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    const Tensor& va2 = tp.value(a);
    const Tensor& vb2 = tp.value(b);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.x[i] += g.x[i] / vb2.x[i];
    }
    if (tp.requires_grad(b)) {
      Tensor& gb = tp.grad_accum(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb.x[i] -= g.x[i] * va2.x[i] / (vb2.x[i] * vb2.x[i]);
    }
  });
}

inline Var scale(Var a, double s) {
  Tape& t = *a.tape;
  Tensor out = t.value(a);
  for (double& v : out.x) v *= s;
  return t.emit(std::move(out), {a}, [a, s](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.x[i] += s * g.x[i];
    }
  });
}

inline Var offset(Var a, double s) {
  Tape& t = *a.tape;
  Tensor out = t.value(a);
  for (double& v : out.x) v += s;
  return t.emit(std::move(out), {a}, [a](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.x[i] += g.x[i];
    }
  });
}

// s - a, elementwise.
inline Var rsub(Var a, double s) {
  Tape& t = *a.tape;
  Tensor out = t.value(a);
  for (double& v : out.x) v = s - v;
  return t.emit(std::move(out), {a}, [a](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.x[i] -= g.x[i];
    }
  });
}

// Elementwise multiply by a constant tensor (masks, fixed weights).
inline Var mul_const(Var a, const Tensor& w) {
  Tape& t = *a.tape;
  const Tensor& va = t.value(a);
  require(va.same_shape(w), "mul_const: shape mismatch");
  Tensor out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.x[i] *= w.x[i];
  Tensor w_copy = w;
  return t.emit(std::move(out), {a}, [a, w_copy](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.x[i] += g.x[i] * w_copy.x[i];
    }
  });
}

inline Var add_const(Var a, const Tensor& w) {
  Tape& t = *a.tape;
  const Tensor& va = t.value(a);
  require(va.same_shape(w), "add_const: shape mismatch");
  Tensor out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.x[i] += w.x[i];
  return t.emit(std::move(out), {a}, [a](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.x[i] += g.x[i];
    }
  });
}

// Constant minus var: c - a.
inline Var sub_from_const(const Tensor& w, Var a) {
  Tape& t = *a.tape;
  const Tensor& va = t.value(a);
  require(va.same_shape(w), "sub_from_const: shape mismatch");
  Tensor out = w;
  for (std::size_t i = 0; i < out.size(); ++i) out.x[i] -= va.x[i];
  return t.emit(std::move(out), {a}, [a](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.x[i] -= g.x[i];
    }
  });
}

inline Var abs(Var a) {
  Tape& t = *a.tape;
  Tensor out = t.value(a);
  for (double& v : out.x) v = std::fabs(v);
  return t.emit(std::move(out), {a}, [a](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    const Tensor& va = tp.value(a);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double s = va.x[i] > 0.0 ? 1.0 : (va.x[i] < 0.0 ? -1.0 : 0.0);
        ga.x[i] += g.x[i] * s;
      }
    }
  });
}

inline Var square(Var a) {
  Tape& t = *a.tape;
  Tensor out = t.value(a);
  for (double& v : out.x) v *= v;
  return t.emit(std::move(out), {a}, [a](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    const Tensor& va = tp.value(a);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.x[i] += 2.0 * va.x[i] * g.x[i];
    }
  });
}

inline Var exp(Var a) {
  Tape& t = *a.tape;
  Tensor out = t.value(a);
  for (double& v : out.x) v = std::exp(v);
  return t.emit(std::move(out), {a}, [a](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    const Tensor& vo = tp.value(Var{&tp, self});
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.x[i] += g.x[i] * vo.x[i];
    }
  });
}

inline Var sigmoid(Var a) {
  Tape& t = *a.tape;
  Tensor out = t.value(a);
  for (double& v : out.x) v = 1.0 / (1.0 + std::exp(-v));
  return t.emit(std::move(out), {a}, [a](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    const Tensor& vo = tp.value(Var{&tp, self});
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.x[i] += g.x[i] * vo.x[i] * (1.0 - vo.x[i]);
    }
  });
}

inline Var tanh(Var a) {
  Tape& t = *a.tape;
  Tensor out = t.value(a);
  for (double& v : out.x) v = std::tanh(v);
  return t.emit(std::move(out), {a}, [a](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    const Tensor& vo = tp.value(Var{&tp, self});
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.x[i] += g.x[i] * (1.0 - vo.x[i] * vo.x[i]);
    }
  });
}

inline Var relu(Var a) {
  Tape& t = *a.tape;
  Tensor out = t.value(a);
  for (double& v : out.x) v = v > 0.0 ? v : 0.0;
  return t.emit(std::move(out), {a}, [a](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    const Tensor& va = tp.value(a);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < g.size(); ++i)
        if (va.x[i] > 0.0) ga.x[i] += g.x[i];
    }
  });
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

inline Var sum(Var a) {
  Tape& t = *a.tape;
  const Tensor& va = t.value(a);
  double s = 0.0;
  for (double v : va.x) s += v;
  return t.emit(Tensor::scalar(s), {a}, [a](Tape& tp, int self) {
    const double g = tp.grad_of(self).x[0];
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (double& v : ga.x) v += g;
    }
  });
}

// Sum of a .* w with constant weights; the workhorse of masked means.
inline Var weighted_sum(Var a, const Tensor& w) {
  Tape& t = *a.tape;
  const Tensor& va = t.value(a);
  require(va.same_shape(w), "weighted_sum: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) s += va.x[i] * w.x[i];
  Tensor w_copy = w;
  return t.emit(Tensor::scalar(s), {a}, [a, w_copy](Tape& tp, int self) {
    const double g = tp.grad_of(self).x[0];
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga.x[i] += g * w_copy.x[i];
    }
  });
}

inline Var mean_all(Var a) {
  const std::size_t n = a.tape->value(a).size();
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// Grid ops (rank-3 tensors, H x W x C)
// ---------------------------------------------------------------------------

// Sum over channels: HxWxC -> HxWx1.
inline Var channel_sum(Var a) {
  Tape& t = *a.tape;
  const Tensor& va = t.value(a);
  require(va.rank() == 3, "channel_sum: rank-3 tensor expected");
  const int h = va.dim(0), w = va.dim(1), c = va.dim(2);
  Tensor out({h, w, 1});
  for (int i = 0; i < h * w; ++i) {
    double s = 0.0;
    for (int ch = 0; ch < c; ++ch) s += va.x[static_cast<std::size_t>(i) * c + ch];
    out.x[static_cast<std::size_t>(i)] = s;
  }
  return t.emit(std::move(out), {a}, [a, c](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      const int n = static_cast<int>(g.size());
      for (int i = 0; i < n; ++i)
        for (int ch = 0; ch < c; ++ch) ga.x[static_cast<std::size_t>(i) * c + ch] += g.x[static_cast<std::size_t>(i)];
    }
  });
}

inline Var channel_mean(Var a) {
  const int c = a.tape->value(a).dim(2);
  return scale(channel_sum(a), 1.0 / static_cast<double>(c));
}

// Concatenate rank-3 tensors along channels.
inline Var concat_c(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_c: empty input");
  Tape& t = *parts[0].tape;
  const int h = t.value(parts[0]).dim(0), w = t.value(parts[0]).dim(1);
  int c_total = 0;
  for (const Var& p : parts) {
    const Tensor& vp = t.value(p);
    require(vp.rank() == 3 && vp.dim(0) == h && vp.dim(1) == w, "concat_c: spatial shape mismatch");
    c_total += vp.dim(2);
  }
  Tensor out({h, w, c_total});
  {
    int c_off = 0;
    for (const Var& p : parts) {
      const Tensor& vp = t.value(p);
      const int c = vp.dim(2);
      for (int i = 0; i < h * w; ++i)
        for (int ch = 0; ch < c; ++ch)
          out.x[(static_cast<std::size_t>(i)) * c_total + c_off + ch] = vp.x[static_cast<std::size_t>(i) * c + ch];
      c_off += c;
    }
  }
  std::vector<Var> parts_copy = parts;
  return t.emit_multi(std::move(out), parts, [parts_copy, c_total, h, w](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    int c_off = 0;
    for (const Var& p : parts_copy) {
      const int c = tp.value(p).dim(2);
      if (tp.requires_grad(p)) {
        Tensor& gp = tp.grad_accum(p);
        for (int i = 0; i < h * w; ++i)
          for (int ch = 0; ch < c; ++ch)
            gp.x[static_cast<std::size_t>(i) * c + ch] += g.x[static_cast<std::size_t>(i) * c_total + c_off + ch];
      }
      c_off += c;
    }
  });
}

// Spatial crop of a rank-3 tensor.
inline Var slice_hw(Var a, int y0, int x0, int h, int w) {
  Tape& t = *a.tape;
  const Tensor& va = t.value(a);
  require(va.rank() == 3, "slice_hw: rank-3 tensor expected");
  const int H = va.dim(0), W = va.dim(1), C = va.dim(2);
  require(y0 >= 0 && x0 >= 0 && h > 0 && w > 0 && y0 + h <= H && x0 + w <= W, "slice_hw: window out of bounds");
  Tensor out({h, w, C});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < C; ++ch)
        out.x[(static_cast<std::size_t>(y) * w + x) * C + ch] =
            va.x[(static_cast<std::size_t>(y0 + y) * W + (x0 + x)) * C + ch];
  return t.emit(std::move(out), {a}, [a, y0, x0, h, w, W, C](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          for (int ch = 0; ch < C; ++ch)
            ga.x[(static_cast<std::size_t>(y0 + y) * W + (x0 + x)) * C + ch] +=
                g.x[(static_cast<std::size_t>(y) * w + x) * C + ch];
    }
  });
}

// Forward difference along x: out[y][x] = a[y][x+1] - a[y][x], W-1 columns.
inline Var fdiff_x(Var a) {
  Tape& t = *a.tape;
  const Tensor& va = t.value(a);
  require(va.rank() == 3 && va.dim(1) >= 2, "fdiff_x: rank-3 tensor with W >= 2 expected");
  const int H = va.dim(0), W = va.dim(1), C = va.dim(2);
  Tensor out({H, W - 1, C});
  for (int y = 0; y < H; ++y)
    for (int x = 0; x + 1 < W; ++x)
      for (int ch = 0; ch < C; ++ch)
        out.x[(static_cast<std::size_t>(y) * (W - 1) + x) * C + ch] =
            va.x[(static_cast<std::size_t>(y) * W + x + 1) * C + ch] - va.x[(static_cast<std::size_t>(y) * W + x) * C + ch];
  return t.emit(std::move(out), {a}, [a, H, W, C](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (int y = 0; y < H; ++y)
        for (int x = 0; x + 1 < W; ++x)
          for (int ch = 0; ch < C; ++ch) {
            const double gv = g.x[(static_cast<std::size_t>(y) * (W - 1) + x) * C + ch];
            ga.x[(static_cast<std::size_t>(y) * W + x + 1) * C + ch] += gv;
            ga.x[(static_cast<std::size_t>(y) * W + x) * C + ch] -= gv;
          }
    }
  });
}

// Forward difference along y: out[y][x] = a[y+1][x] - a[y][x], H-1 rows.
inline Var fdiff_y(Var a) {
  Tape& t = *a.tape;
  const Tensor& va = t.value(a);
  require(va.rank() == 3 && va.dim(0) >= 2, "fdiff_y: rank-3 tensor with H >= 2 expected");
  const int H = va.dim(0), W = va.dim(1), C = va.dim(2);
  Tensor out({H - 1, W, C});
  for (int y = 0; y + 1 < H; ++y)
    for (int x = 0; x < W; ++x)
      for (int ch = 0; ch < C; ++ch)
        out.x[(static_cast<std::size_t>(y) * W + x) * C + ch] =
            va.x[(static_cast<std::size_t>(y + 1) * W + x) * C + ch] - va.x[(static_cast<std::size_t>(y) * W + x) * C + ch];
  return t.emit(std::move(out), {a}, [a, H, W, C](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_accum(a);
      for (int y = 0; y + 1 < H; ++y)
        for (int x = 0; x < W; ++x)
          for (int ch = 0; ch < C; ++ch) {
            const double gv = g.x[(static_cast<std::size_t>(y) * W + x) * C + ch];
            ga.x[(static_cast<std::size_t>(y + 1) * W + x) * C + ch] += gv;
            ga.x[(static_cast<std::size_t>(y) * W + x) * C + ch] -= gv;
          }
    }
  });
}

// Box mean over a k x k window, normalized by the in-image sample count so
// borders average over what exists.
inline Var box_mean(Var a, int k) {
  require(k >= 1 && k % 2 == 1, "box_mean: window must be odd and >= 1");
  Tape& t = *a.tape;
  const Tensor& va = t.value(a);
  require(va.rank() == 3, "box_mean: rank-3 tensor expected");
  const int H = va.dim(0), W = va.dim(1), C = va.dim(2);
  const int r = k / 2;
  Tensor out({H, W, C});
  for (int y = 0; y < H; ++y) {
    const int y_lo = y - r < 0 ? 0 : y - r;
    const int y_hi = y + r >= H ? H - 1 : y + r;
    for (int x = 0; x < W; ++x) {
      const int x_lo = x - r < 0 ? 0 : x - r;
      const int x_hi = x + r >= W ? W - 1 : x + r;
      const double inv = 1.0 / ((y_hi - y_lo + 1) * (x_hi - x_lo + 1));
      for (int ch = 0; ch < C; ++ch) {
        double s = 0.0;
        for (int yy = y_lo; yy <= y_hi; ++yy)
          for (int xx = x_lo; xx <= x_hi; ++xx) s += va.x[(static_cast<std::size_t>(yy) * W + xx) * C + ch];
        out.x[(static_cast<std::size_t>(y) * W + x) * C + ch] = s * inv;
      }
    }
  }
  return t.emit(std::move(out), {a}, [a, H, W, C, r](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    if (!tp.requires_grad(a)) return;
    Tensor& ga = tp.grad_accum(a);
    for (int y = 0; y < H; ++y) {
      const int y_lo = y - r < 0 ? 0 : y - r;
      const int y_hi = y + r >= H ? H - 1 : y + r;
      for (int x = 0; x < W; ++x) {
        const int x_lo = x - r < 0 ? 0 : x - r;
        const int x_hi = x + r >= W ? W - 1 : x + r;
        const double inv = 1.0 / ((y_hi - y_lo + 1) * (x_hi - x_lo + 1));
        for (int ch = 0; ch < C; ++ch) {
          const double gv = g.x[(static_cast<std::size_t>(y) * W + x) * C + ch] * inv;
          for (int yy = y_lo; yy <= y_hi; ++yy)
            for (int xx = x_lo; xx <= x_hi; ++xx) ga.x[(static_cast<std::size_t>(yy) * W + xx) * C + ch] += gv;
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Convolution (zero 'same' padding, square odd kernel, stride 1 or 2)
// ---------------------------------------------------------------------------

// x: (H, W, Ci); w: (K, K, Ci, Co); b: (Co). Output (ceil(H/s), ceil(W/s), Co).
inline Var conv2d(Var x, Var w, Var b, int stride = 1) {
  detail::require_same_tape(x, w, "conv2d");
  detail::require_same_tape(x, b, "conv2d");
  Tape& t = *x.tape;
  const Tensor& vx = t.value(x);
  const Tensor& vw = t.value(w);
  const Tensor& vb = t.value(b);
  require(vx.rank() == 3 && vw.rank() == 4 && vb.rank() == 1, "conv2d: bad ranks");
  const int H = vx.dim(0), W = vx.dim(1), Ci = vx.dim(2);
  const int K = vw.dim(0), Co = vw.dim(3);
  require(vw.dim(1) == K && K % 2 == 1, "conv2d: kernel must be square and odd");
  require(vw.dim(2) == Ci, "conv2d: input channel mismatch");
  require(vb.dim(0) == Co, "conv2d: bias size mismatch");
  require(stride == 1 || stride == 2, "conv2d: stride must be 1 or 2");

  const int pad = K / 2;
  const int Ho = (H + stride - 1) / stride;
  const int Wo = (W + stride - 1) / stride;
  Tensor out({Ho, Wo, Co});
  const double* px = vx.x.data();
  const double* pw = vw.x.data();
  double* po = out.x.data();
  for (int oy = 0; oy < Ho; ++oy) {
    for (int ox = 0; ox < Wo; ++ox) {
      double* acc = po + (static_cast<std::size_t>(oy) * Wo + ox) * Co;
      for (int co = 0; co < Co; ++co) acc[co] = vb.x[static_cast<std::size_t>(co)];
      for (int ky = 0; ky < K; ++ky) {
        const int iy = oy * stride + ky - pad;
        if (iy < 0 || iy >= H) continue;
        for (int kx = 0; kx < K; ++kx) {
          const int ix = ox * stride + kx - pad;
          if (ix < 0 || ix >= W) continue;
          const double* xin = px + (static_cast<std::size_t>(iy) * W + ix) * Ci;
          const double* wk = pw + (static_cast<std::size_t>(ky) * K + kx) * Ci * Co;
          for (int ci = 0; ci < Ci; ++ci) {
            const double xv = xin[ci];
            const double* wrow = wk + static_cast<std::size_t>(ci) * Co;
            for (int co = 0; co < Co; ++co) acc[co] += xv * wrow[co];
          }
        }
      }
    }
  }

  return t.emit(std::move(out), {x, w, b}, [x, w, b, H, W, Ci, K, Co, stride](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    const Tensor& vx2 = tp.value(x);
    const Tensor& vw2 = tp.value(w);
    const int pad = K / 2;
    const int Ho = g.dim(0), Wo = g.dim(1);
    const bool need_x = tp.requires_grad(x);
    const bool need_w = tp.requires_grad(w);
    const bool need_b = tp.requires_grad(b);
    Tensor* gx = need_x ? &tp.grad_accum(x) : nullptr;
    Tensor* gw = need_w ? &tp.grad_accum(w) : nullptr;
    Tensor* gb = need_b ? &tp.grad_accum(b) : nullptr;
    for (int oy = 0; oy < Ho; ++oy) {
      for (int ox = 0; ox < Wo; ++ox) {
        const double* go = g.x.data() + (static_cast<std::size_t>(oy) * Wo + ox) * Co;
        if (need_b) {
          for (int co = 0; co < Co; ++co) gb->x[static_cast<std::size_t>(co)] += go[co];
        }
        for (int ky = 0; ky < K; ++ky) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= H) continue;
          for (int kx = 0; kx < K; ++kx) {
            const int ix = ox * stride + kx - pad;
            if (ix < 0 || ix >= W) continue;
            const double* xin = vx2.x.data() + (static_cast<std::size_t>(iy) * W + ix) * Ci;
            const double* wk = vw2.x.data() + (static_cast<std::size_t>(ky) * K + kx) * Ci * Co;
            for (int ci = 0; ci < Ci; ++ci) {
              const double xv = xin[ci];
              const double* wrow = wk + static_cast<std::size_t>(ci) * Co;
              double acc_x = 0.0;
              if (need_w) {
                double* gwrow = gw->x.data() + ((static_cast<std::size_t>(ky) * K + kx) * Ci + ci) * Co;
                for (int co = 0; co < Co; ++co) {
                  gwrow[co] += xv * go[co];
                  acc_x += wrow[co] * go[co];
                }
              } else {
                for (int co = 0; co < Co; ++co) acc_x += wrow[co] * go[co];
              }
              if (need_x) gx->x[(static_cast<std::size_t>(iy) * W + ix) * Ci + ci] += acc_x;
            }
          }
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Sampling ops
// ---------------------------------------------------------------------------

namespace detail {

struct BilinearTap {
  int x0, x1, y0, y1;
  double fx, fy;
  double dx_gate, dy_gate;  // 1 inside the unclamped range, 0 where clamped
};

inline BilinearTap make_tap(double sx, double sy, int W, int H) {
  BilinearTap tap{};
  tap.dx_gate = (sx > 0.0 && sx < W - 1) ? 1.0 : 0.0;
  tap.dy_gate = (sy > 0.0 && sy < H - 1) ? 1.0 : 0.0;
  double cx = sx < 0.0 ? 0.0 : (sx > W - 1 ? W - 1 : sx);
  double cy = sy < 0.0 ? 0.0 : (sy > H - 1 ? H - 1 : sy);
  tap.x0 = static_cast<int>(std::floor(cx));
  tap.y0 = static_cast<int>(std::floor(cy));
  if (tap.x0 > W - 1) tap.x0 = W - 1;
  if (tap.y0 > H - 1) tap.y0 = H - 1;
  tap.x1 = tap.x0 + 1 < W ? tap.x0 + 1 : W - 1;
  tap.y1 = tap.y0 + 1 < H ? tap.y0 + 1 : H - 1;
  tap.fx = cx - tap.x0;
  tap.fy = cy - tap.y0;
  return tap;
}

}  // namespace detail

// Bilinear gather of `img` at (x + u, y + v); sample coordinates are
// edge-clamped, so values are defined everywhere while out-of-frame pixels
// are expected to be masked out by the caller. Differentiable in both
// arguments.
inline Var bilinear_sample(Var img, Var flow) {
  detail::require_same_tape(img, flow, "bilinear_sample");
  Tape& t = *img.tape;
  const Tensor& vi = t.value(img);
  const Tensor& vf = t.value(flow);
  require(vi.rank() == 3 && vf.rank() == 3 && vf.dim(2) == 2, "bilinear_sample: (H,W,C) image and (H,W,2) flow expected");
  require(vi.dim(0) == vf.dim(0) && vi.dim(1) == vf.dim(1), "bilinear_sample: shape mismatch");
  const int H = vi.dim(0), W = vi.dim(1), C = vi.dim(2);

  Tensor out({H, W, C});
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t pi = static_cast<std::size_t>(y) * W + x;
      const double sx = x + vf.x[pi * 2];
      const double sy = y + vf.x[pi * 2 + 1];
      const auto tap = detail::make_tap(sx, sy, W, H);
      const double w00 = (1.0 - tap.fy) * (1.0 - tap.fx);
      const double w01 = (1.0 - tap.fy) * tap.fx;
      const double w10 = tap.fy * (1.0 - tap.fx);
      const double w11 = tap.fy * tap.fx;
      const double* r0 = vi.x.data() + (static_cast<std::size_t>(tap.y0) * W) * C;
      const double* r1 = vi.x.data() + (static_cast<std::size_t>(tap.y1) * W) * C;
      for (int ch = 0; ch < C; ++ch) {
        out.x[pi * C + ch] = w00 * r0[static_cast<std::size_t>(tap.x0) * C + ch] +
                             w01 * r0[static_cast<std::size_t>(tap.x1) * C + ch] +
                             w10 * r1[static_cast<std::size_t>(tap.x0) * C + ch] +
                             w11 * r1[static_cast<std::size_t>(tap.x1) * C + ch];
      }
    }
  }

  return t.emit(std::move(out), {img, flow}, [img, flow, H, W, C](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    const Tensor& vi2 = tp.value(img);
    const Tensor& vf2 = tp.value(flow);
    const bool need_img = tp.requires_grad(img);
    const bool need_flow = tp.requires_grad(flow);
    Tensor* gi = need_img ? &tp.grad_accum(img) : nullptr;
    Tensor* gf = need_flow ? &tp.grad_accum(flow) : nullptr;
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const std::size_t pi = static_cast<std::size_t>(y) * W + x;
        const double sx = x + vf2.x[pi * 2];
        const double sy = y + vf2.x[pi * 2 + 1];
        const auto tap = detail::make_tap(sx, sy, W, H);
        const double w00 = (1.0 - tap.fy) * (1.0 - tap.fx);
        const double w01 = (1.0 - tap.fy) * tap.fx;
        const double w10 = tap.fy * (1.0 - tap.fx);
        const double w11 = tap.fy * tap.fx;
        const std::size_t i00 = (static_cast<std::size_t>(tap.y0) * W + tap.x0) * C;
        const std::size_t i01 = (static_cast<std::size_t>(tap.y0) * W + tap.x1) * C;
        const std::size_t i10 = (static_cast<std::size_t>(tap.y1) * W + tap.x0) * C;
        const std::size_t i11 = (static_cast<std::size_t>(tap.y1) * W + tap.x1) * C;
        double du = 0.0, dv = 0.0;
        for (int ch = 0; ch < C; ++ch) {
          const double gv = g.x[pi * C + ch];
          if (gv == 0.0) continue;
          if (need_img) {
            gi->x[i00 + ch] += gv * w00;
            gi->x[i01 + ch] += gv * w01;
            gi->x[i10 + ch] += gv * w10;
            gi->x[i11 + ch] += gv * w11;
          }
          if (need_flow) {
            const double v00 = vi2.x[i00 + ch], v01 = vi2.x[i01 + ch];
            const double v10 = vi2.x[i10 + ch], v11 = vi2.x[i11 + ch];
            du += gv * ((1.0 - tap.fy) * (v01 - v00) + tap.fy * (v11 - v10));
            dv += gv * ((1.0 - tap.fx) * (v10 - v00) + tap.fx * (v11 - v01));
          }
        }
        if (need_flow) {
          gf->x[pi * 2] += du * tap.dx_gate;
          gf->x[pi * 2 + 1] += dv * tap.dy_gate;
        }
      }
    }
  });
}

// Local correlation lookup: for each latent pixel p, the dot product (scaled
// by 1/sqrt(C)) between f1(p) and f2 sampled bilinearly at p + flow(p) + d
// for every offset d in the (2r+1)^2 window. Output (H, W, (2r+1)^2).
inline Var local_correlation(Var f1, Var f2, Var flow, int radius) {
  detail::require_same_tape(f1, f2, "local_correlation");
  detail::require_same_tape(f1, flow, "local_correlation");
  require(radius >= 0, "local_correlation: negative radius");
  Tape& t = *f1.tape;
  const Tensor& v1 = t.value(f1);
  const Tensor& v2 = t.value(f2);
  const Tensor& vf = t.value(flow);
  require(v1.rank() == 3 && v2.rank() == 3 && v1.same_shape(v2), "local_correlation: feature shape mismatch");
  require(vf.rank() == 3 && vf.dim(2) == 2 && vf.dim(0) == v1.dim(0) && vf.dim(1) == v1.dim(1),
          "local_correlation: flow shape mismatch");
  const int H = v1.dim(0), W = v1.dim(1), C = v1.dim(2);
  const int D = 2 * radius + 1;
  const int K = D * D;
  const double inv_sqrt_c = 1.0 / std::sqrt(static_cast<double>(C));

  Tensor out({H, W, K});
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t pi = static_cast<std::size_t>(y) * W + x;
      const double bx = x + vf.x[pi * 2];
      const double by = y + vf.x[pi * 2 + 1];
      const double* f1p = v1.x.data() + pi * C;
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          const auto tap = detail::make_tap(bx + dx, by + dy, W, H);
          const double w00 = (1.0 - tap.fy) * (1.0 - tap.fx);
          const double w01 = (1.0 - tap.fy) * tap.fx;
          const double w10 = tap.fy * (1.0 - tap.fx);
          const double w11 = tap.fy * tap.fx;
          const double* r0 = v2.x.data() + (static_cast<std::size_t>(tap.y0) * W) * C;
          const double* r1 = v2.x.data() + (static_cast<std::size_t>(tap.y1) * W) * C;
          double dot = 0.0;
          for (int ch = 0; ch < C; ++ch) {
            const double sample = w00 * r0[static_cast<std::size_t>(tap.x0) * C + ch] +
                                  w01 * r0[static_cast<std::size_t>(tap.x1) * C + ch] +
                                  w10 * r1[static_cast<std::size_t>(tap.x0) * C + ch] +
                                  w11 * r1[static_cast<std::size_t>(tap.x1) * C + ch];
            dot += f1p[ch] * sample;
          }
          const int k = (dy + radius) * D + (dx + radius);
          out.x[pi * K + k] = dot * inv_sqrt_c;
        }
      }
    }
  }

  return t.emit(std::move(out), {f1, f2, flow}, [f1, f2, flow, H, W, C, radius, K, D, inv_sqrt_c](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    const Tensor& v1b = tp.value(f1);
    const Tensor& v2b = tp.value(f2);
    const Tensor& vfb = tp.value(flow);
    const bool need_f1 = tp.requires_grad(f1);
    const bool need_f2 = tp.requires_grad(f2);
    const bool need_flow = tp.requires_grad(flow);
    Tensor* g1 = need_f1 ? &tp.grad_accum(f1) : nullptr;
    Tensor* g2 = need_f2 ? &tp.grad_accum(f2) : nullptr;
    Tensor* gf = need_flow ? &tp.grad_accum(flow) : nullptr;
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const std::size_t pi = static_cast<std::size_t>(y) * W + x;
        const double bx = x + vfb.x[pi * 2];
        const double by = y + vfb.x[pi * 2 + 1];
        const double* f1p = v1b.x.data() + pi * C;
        double du = 0.0, dv = 0.0;
        for (int dy = -radius; dy <= radius; ++dy) {
          for (int dx = -radius; dx <= radius; ++dx) {
            const int k = (dy + radius) * D + (dx + radius);
            const double gk = g.x[pi * K + k] * inv_sqrt_c;
            if (gk == 0.0) continue;
            const auto tap = detail::make_tap(bx + dx, by + dy, W, H);
            const double w00 = (1.0 - tap.fy) * (1.0 - tap.fx);
            const double w01 = (1.0 - tap.fy) * tap.fx;
            const double w10 = tap.fy * (1.0 - tap.fx);
            const double w11 = tap.fy * tap.fx;
            const std::size_t i00 = (static_cast<std::size_t>(tap.y0) * W + tap.x0) * C;
            const std::size_t i01 = (static_cast<std::size_t>(tap.y0) * W + tap.x1) * C;
            const std::size_t i10 = (static_cast<std::size_t>(tap.y1) * W + tap.x0) * C;
            const std::size_t i11 = (static_cast<std::size_t>(tap.y1) * W + tap.x1) * C;
            for (int ch = 0; ch < C; ++ch) {
              const double v00 = v2b.x[i00 + ch], v01 = v2b.x[i01 + ch];
              const double v10 = v2b.x[i10 + ch], v11 = v2b.x[i11 + ch];
              const double sample = w00 * v00 + w01 * v01 + w10 * v10 + w11 * v11;
              if (need_f1) g1->x[pi * C + ch] += gk * sample;
              const double a = gk * f1p[ch];
              if (need_f2) {
                g2->x[i00 + ch] += a * w00;
                g2->x[i01 + ch] += a * w01;
                g2->x[i10 + ch] += a * w10;
                g2->x[i11 + ch] += a * w11;
              }
              if (need_flow) {
                du += a * ((1.0 - tap.fy) * (v01 - v00) + tap.fy * (v11 - v10)) * tap.dx_gate;
                dv += a * ((1.0 - tap.fx) * (v10 - v00) + tap.fx * (v11 - v01)) * tap.dy_gate;
              }
            }
          }
        }
        if (need_flow) {
          gf->x[pi * 2] += du;
          gf->x[pi * 2 + 1] += dv;
        }
      }
    }
  });
}

// Bilinear upsampling by an integer factor using half-pixel centers
// (source coordinate (o + 0.5)/f - 0.5, edge-clamped).
inline Var upsample_bilinear(Var a, int factor) {
  require(factor >= 1, "upsample_bilinear: factor must be >= 1");
  Tape& t = *a.tape;
  const Tensor& va = t.value(a);
  require(va.rank() == 3, "upsample_bilinear: rank-3 tensor expected");
  const int H = va.dim(0), W = va.dim(1), C = va.dim(2);
  const int Ho = H * factor, Wo = W * factor;

  Tensor out({Ho, Wo, C});
  for (int oy = 0; oy < Ho; ++oy) {
    const double syf = (oy + 0.5) / factor - 0.5;
    for (int ox = 0; ox < Wo; ++ox) {
      const double sxf = (ox + 0.5) / factor - 0.5;
      const auto tap = detail::make_tap(sxf, syf, W, H);
      const double w00 = (1.0 - tap.fy) * (1.0 - tap.fx);
      const double w01 = (1.0 - tap.fy) * tap.fx;
      const double w10 = tap.fy * (1.0 - tap.fx);
      const double w11 = tap.fy * tap.fx;
      for (int ch = 0; ch < C; ++ch) {
        out.x[(static_cast<std::size_t>(oy) * Wo + ox) * C + ch] =
            w00 * va.x[(static_cast<std::size_t>(tap.y0) * W + tap.x0) * C + ch] +
            w01 * va.x[(static_cast<std::size_t>(tap.y0) * W + tap.x1) * C + ch] +
            w10 * va.x[(static_cast<std::size_t>(tap.y1) * W + tap.x0) * C + ch] +
            w11 * va.x[(static_cast<std::size_t>(tap.y1) * W + tap.x1) * C + ch];
      }
    }
  }

  return t.emit(std::move(out), {a}, [a, H, W, C, factor](Tape& tp, int self) {
    const Tensor& g = tp.grad_of(self);
    if (!tp.requires_grad(a)) return;
    Tensor& ga = tp.grad_accum(a);
    const int Ho = H * factor, Wo = W * factor;
    for (int oy = 0; oy < Ho; ++oy) {
      const double syf = (oy + 0.5) / factor - 0.5;
      for (int ox = 0; ox < Wo; ++ox) {
        const double sxf = (ox + 0.5) / factor - 0.5;
        const auto tap = detail::make_tap(sxf, syf, W, H);
        const double w00 = (1.0 - tap.fy) * (1.0 - tap.fx);
        const double w01 = (1.0 - tap.fy) * tap.fx;
        const double w10 = tap.fy * (1.0 - tap.fx);
        const double w11 = tap.fy * tap.fx;
        for (int ch = 0; ch < C; ++ch) {
          const double gv = g.x[(static_cast<std::size_t>(oy) * Wo + ox) * C + ch];
          if (gv == 0.0) continue;
          ga.x[(static_cast<std::size_t>(tap.y0) * W + tap.x0) * C + ch] += gv * w00;
          ga.x[(static_cast<std::size_t>(tap.y0) * W + tap.x1) * C + ch] += gv * w01;
          ga.x[(static_cast<std::size_t>(tap.y1) * W + tap.x0) * C + ch] += gv * w10;
          ga.x[(static_cast<std::size_t>(tap.y1) * W + tap.x1) * C + ch] += gv * w11;
        }
      }
    }
  });
}

}  // namespace flowda::ad
