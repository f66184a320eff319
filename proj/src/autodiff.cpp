#include "magnifier/autodiff.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace magnifier::nn {

namespace {

using MatRM = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatRM>;
using CMapRM = Eigen::Map<const MatRM>;

std::shared_ptr<Node> new_node(Tensor value, const std::vector<Var>& parents) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const auto& p : parents)
    if (p.defined() && p.requires_grad()) n->requires_grad = true;
  if (n->requires_grad)
    for (const auto& p : parents)
      if (p.defined()) n->parents.push_back(p.node());
  return n;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeMismatch(std::string(op) + ": operand shapes differ");
}

// Elementwise op with backward dx = g * dfdx(x, y).
template <typename F, typename DF>
Var unary_op(const Var& x, F f, DF dfdx) {
  Tensor out(x.value().shape());
  const Tensor& xv = x.value();
  for (std::int64_t i = 0; i < xv.numel(); ++i) out[i] = f(xv[i]);
  auto n = new_node(std::move(out), {x});
  if (n->requires_grad) {
    Node* self = n.get();
    auto px = x.node();
    n->backward = [self, px, dfdx] {
      Tensor& gx = px->ensure_grad();
      const Tensor& g = self->grad;
      const Tensor& xv = px->value;
      for (std::int64_t i = 0; i < xv.numel(); ++i)
        gx[i] += g[i] * dfdx(xv[i]);
    };
  }
  return Var(n);
}

}  // namespace

void Var::backward() const {
  if (!n_) return;
  if (n_->value.numel() != 1)
    throw ShapeMismatch("backward: root must be a scalar");
  // Post-order topological sort, iterative.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{n_.get(), 0}};
  seen.insert(n_.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* p = node->parents[idx++].get();
      if (seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  n_->ensure_grad();
  n_->grad.fill(1.0f);
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if ((*it)->backward) (*it)->backward();
}

// ---------------------------------------------------------------------------
// elementwise
// ---------------------------------------------------------------------------

Var add(const Var& a, const Var& b) {
  check_same_shape(a.value(), b.value(), "add");
  Tensor out(a.value().shape());
  for (std::int64_t i = 0; i < out.numel(); ++i)
    out[i] = a.value()[i] + b.value()[i];
  auto n = new_node(std::move(out), {a, b});
  if (n->requires_grad) {
    Node* self = n.get();
    auto pa = a.node(), pb = b.node();
    n->backward = [self, pa, pb] {
      const Tensor& g = self->grad;
      if (pa->requires_grad) {
        Tensor& ga = pa->ensure_grad();
        for (std::int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
      }
      if (pb->requires_grad) {
        Tensor& gb = pb->ensure_grad();
        for (std::int64_t i = 0; i < g.numel(); ++i) gb[i] += g[i];
      }
    };
  }
  return Var(n);
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a.value(), b.value(), "sub");
  Tensor out(a.value().shape());
  for (std::int64_t i = 0; i < out.numel(); ++i)
    out[i] = a.value()[i] - b.value()[i];
  auto n = new_node(std::move(out), {a, b});
  if (n->requires_grad) {
    Node* self = n.get();
    auto pa = a.node(), pb = b.node();
    n->backward = [self, pa, pb] {
      const Tensor& g = self->grad;
      if (pa->requires_grad) {
        Tensor& ga = pa->ensure_grad();
        for (std::int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
      }
      if (pb->requires_grad) {
        Tensor& gb = pb->ensure_grad();
        for (std::int64_t i = 0; i < g.numel(); ++i) gb[i] -= g[i];
      }
    };
  }
  return Var(n);
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a.value(), b.value(), "mul");
  Tensor out(a.value().shape());
  for (std::int64_t i = 0; i < out.numel(); ++i)
    out[i] = a.value()[i] * b.value()[i];
  auto n = new_node(std::move(out), {a, b});
  if (n->requires_grad) {
    Node* self = n.get();
    auto pa = a.node(), pb = b.node();
    n->backward = [self, pa, pb] {
      const Tensor& g = self->grad;
      if (pa->requires_grad) {
        Tensor& ga = pa->ensure_grad();
        for (std::int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * pb->value[i];
      }
      if (pb->requires_grad) {
        Tensor& gb = pb->ensure_grad();
        for (std::int64_t i = 0; i < g.numel(); ++i) gb[i] += g[i] * pa->value[i];
      }
    };
  }
  return Var(n);
}

Var scale(const Var& x, float s) {
  return unary_op(x, [s](float v) { return v * s; }, [s](float) { return s; });
}

Var add_const(const Var& x, float c) {
  return unary_op(x, [c](float v) { return v + c; }, [](float) { return 1.0f; });
}

Var relu(const Var& x) {
  // std::max(v, 0) rather than a ternary so NaN propagates instead of
  // silently flushing to zero (divergence detection relies on this).
  return unary_op(x, [](float v) { return std::max(v, 0.0f); },
                  [](float v) { return v > 0 ? 1.0f : 0.0f; });
}

Var gelu(const Var& x) {
  constexpr float kRoot2OverPi = 0.7978845608f;
  constexpr float kC = 0.044715f;
  auto f = [=](float v) {
    float u = kRoot2OverPi * (v + kC * v * v * v);
    return 0.5f * v * (1.0f + std::tanh(u));
  };
  auto df = [=](float v) {
    float u = kRoot2OverPi * (v + kC * v * v * v);
    float t = std::tanh(u);
    float du = kRoot2OverPi * (1.0f + 3.0f * kC * v * v);
    return 0.5f * (1.0f + t) + 0.5f * v * (1.0f - t * t) * du;
  };
  return unary_op(x, f, df);
}

Var hardswish(const Var& x) {
  auto f = [](float v) {
    if (v <= -3.0f) return 0.0f;
    if (v >= 3.0f) return v;
    return v * (v + 3.0f) / 6.0f;
  };
  auto df = [](float v) {
    if (v <= -3.0f) return 0.0f;
    if (v >= 3.0f) return 1.0f;
    return (2.0f * v + 3.0f) / 6.0f;
  };
  return unary_op(x, f, df);
}

Var sigmoid(const Var& x) {
  auto f = [](float v) { return 1.0f / (1.0f + std::exp(-v)); };
  auto df = [f](float v) {
    float s = f(v);
    return s * (1.0f - s);
  };
  return unary_op(x, f, df);
}

Var log_(const Var& x) {
  return unary_op(x, [](float v) { return std::log(v); },
                  [](float v) { return 1.0f / v; });
}

Var pow_scalar(const Var& x, float p) {
  return unary_op(
      x, [p](float v) { return std::pow(v, p); },
      [p](float v) { return p * std::pow(v, p - 1.0f); });
}

Var clamp(const Var& x, float lo, float hi) {
  return unary_op(
      x, [lo, hi](float v) { return std::min(std::max(v, lo), hi); },
      [lo, hi](float v) { return (v > lo && v < hi) ? 1.0f : 0.0f; });
}

// ---------------------------------------------------------------------------
// shape
// ---------------------------------------------------------------------------

Var reshape(const Var& x, std::vector<int> shape) {
  if (Tensor::count(shape) != x.value().numel())
    throw ShapeMismatch("reshape: element count mismatch");
  Tensor out = x.value();
  out = Tensor::from(std::move(shape),
                     std::vector<float>(out.data(), out.data() + out.numel()));
  auto n = new_node(std::move(out), {x});
  if (n->requires_grad) {
    Node* self = n.get();
    auto px = x.node();
    n->backward = [self, px] {
      Tensor& gx = px->ensure_grad();
      const Tensor& g = self->grad;
      for (std::int64_t i = 0; i < g.numel(); ++i) gx[i] += g[i];
    };
  }
  return Var(n);
}

namespace {
std::vector<std::int64_t> strides_of(const std::vector<int>& shape) {
  std::vector<std::int64_t> s(shape.size(), 1);
  for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i)
    s[i] = s[i + 1] * shape[i + 1];
  return s;
}
}  // namespace

Var permute(const Var& x, const std::vector<int>& dims) {
  const Tensor& xv = x.value();
  if (static_cast<int>(dims.size()) != xv.rank())
    throw ShapeMismatch("permute: rank mismatch");
  std::vector<int> out_shape(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) out_shape[i] = xv.dim(dims[i]);
  auto in_strides = strides_of(xv.shape());
  auto out_strides = strides_of(out_shape);
  // For each output index, the source stride along each output axis.
  std::vector<std::int64_t> src_stride(dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) src_stride[i] = in_strides[dims[i]];

  // By value: the backward closure outlives this frame.
  auto map_index = [out_strides, src_stride](std::int64_t oi) {
    std::int64_t si = 0;
    for (std::size_t d = 0; d < out_strides.size(); ++d) {
      std::int64_t c = oi / out_strides[d];
      oi -= c * out_strides[d];
      si += c * src_stride[d];
    }
    return si;
  };

  Tensor out(out_shape);
  for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = xv[map_index(i)];
  auto n = new_node(std::move(out), {x});
  if (n->requires_grad) {
    Node* self = n.get();
    auto px = x.node();
    n->backward = [self, px, map_index] {
      Tensor& gx = px->ensure_grad();
      const Tensor& g = self->grad;
      for (std::int64_t i = 0; i < g.numel(); ++i) gx[map_index(i)] += g[i];
    };
  }
  return Var(n);
}

Var concat_channels(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 4 || bv.rank() != 4 || av.dim(0) != bv.dim(0) ||
      av.dim(2) != bv.dim(2) || av.dim(3) != bv.dim(3))
    throw IncompatibleShapes("concat_channels: non-channel dims differ");
  int B = av.dim(0), Ca = av.dim(1), Cb = bv.dim(1), H = av.dim(2), W = av.dim(3);
  std::int64_t plane = static_cast<std::int64_t>(H) * W;
  Tensor out({B, Ca + Cb, H, W});
  for (int nidx = 0; nidx < B; ++nidx) {
    std::copy_n(av.data() + nidx * Ca * plane, Ca * plane,
                out.data() + static_cast<std::int64_t>(nidx) * (Ca + Cb) * plane);
    std::copy_n(bv.data() + nidx * Cb * plane, Cb * plane,
                out.data() + static_cast<std::int64_t>(nidx) * (Ca + Cb) * plane + Ca * plane);
  }
  auto n = new_node(std::move(out), {a, b});
  if (n->requires_grad) {
    Node* self = n.get();
    auto pa = a.node(), pb = b.node();
    n->backward = [self, pa, pb, B, Ca, Cb, plane] {
      const Tensor& g = self->grad;
      for (int nidx = 0; nidx < B; ++nidx) {
        const float* gn = g.data() + static_cast<std::int64_t>(nidx) * (Ca + Cb) * plane;
        if (pa->requires_grad) {
          Tensor& ga = pa->ensure_grad();
          float* dst = ga.data() + static_cast<std::int64_t>(nidx) * Ca * plane;
          for (std::int64_t i = 0; i < Ca * plane; ++i) dst[i] += gn[i];
        }
        if (pb->requires_grad) {
          Tensor& gb = pb->ensure_grad();
          float* dst = gb.data() + static_cast<std::int64_t>(nidx) * Cb * plane;
          for (std::int64_t i = 0; i < Cb * plane; ++i) dst[i] += gn[Ca * plane + i];
        }
      }
    };
  }
  return Var(n);
}

Var upsample_nearest(const Var& x, int factor) {
  const Tensor& xv = x.value();
  if (xv.rank() != 4) throw ShapeMismatch("upsample_nearest: expected NCHW");
  int B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
  Tensor out({B, C, H * factor, W * factor});
  for (int nidx = 0; nidx < B; ++nidx)
    for (int c = 0; c < C; ++c)
      for (int h = 0; h < H * factor; ++h)
        for (int w = 0; w < W * factor; ++w)
          out.at(nidx, c, h, w) = xv.at(nidx, c, h / factor, w / factor);
  auto n = new_node(std::move(out), {x});
  if (n->requires_grad) {
    Node* self = n.get();
    auto px = x.node();
    n->backward = [self, px, B, C, H, W, factor] {
      Tensor& gx = px->ensure_grad();
      const Tensor& g = self->grad;
      for (int nidx = 0; nidx < B; ++nidx)
        for (int c = 0; c < C; ++c)
          for (int h = 0; h < H * factor; ++h)
            for (int w = 0; w < W * factor; ++w)
              gx.at(nidx, c, h / factor, w / factor) += g.at(nidx, c, h, w);
    };
  }
  return Var(n);
}

// ---------------------------------------------------------------------------
// linear algebra
// ---------------------------------------------------------------------------

Var matmul(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0))
    throw ShapeMismatch("matmul: incompatible shapes");
  int M = av.dim(0), K = av.dim(1), N = bv.dim(1);
  Tensor out({M, N});
  MapRM(out.data(), M, N) = CMapRM(av.data(), M, K) * CMapRM(bv.data(), K, N);
  auto n = new_node(std::move(out), {a, b});
  if (n->requires_grad) {
    Node* self = n.get();
    auto pa = a.node(), pb = b.node();
    n->backward = [self, pa, pb, M, K, N] {
      CMapRM g(self->grad.data(), M, N);
      if (pa->requires_grad)
        MapRM(pa->ensure_grad().data(), M, K) += g * CMapRM(pb->value.data(), K, N).transpose();
      if (pb->requires_grad)
        MapRM(pb->ensure_grad().data(), K, N) += CMapRM(pa->value.data(), M, K).transpose() * g;
    };
  }
  return Var(n);
}

Var bmm(const Var& a, const Var& b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 3 || bv.rank() != 3 || av.dim(0) != bv.dim(0) ||
      av.dim(2) != bv.dim(1))
    throw ShapeMismatch("bmm: incompatible shapes");
  int B = av.dim(0), M = av.dim(1), K = av.dim(2), N = bv.dim(2);
  Tensor out({B, M, N});
  for (int i = 0; i < B; ++i)
    MapRM(out.data() + static_cast<std::int64_t>(i) * M * N, M, N) =
        CMapRM(av.data() + static_cast<std::int64_t>(i) * M * K, M, K) *
        CMapRM(bv.data() + static_cast<std::int64_t>(i) * K * N, K, N);
  auto n = new_node(std::move(out), {a, b});
  if (n->requires_grad) {
    Node* self = n.get();
    auto pa = a.node(), pb = b.node();
    n->backward = [self, pa, pb, B, M, K, N] {
      for (int i = 0; i < B; ++i) {
        CMapRM g(self->grad.data() + static_cast<std::int64_t>(i) * M * N, M, N);
        if (pa->requires_grad)
          MapRM(pa->ensure_grad().data() + static_cast<std::int64_t>(i) * M * K, M, K) +=
              g * CMapRM(pb->value.data() + static_cast<std::int64_t>(i) * K * N, K, N).transpose();
        if (pb->requires_grad)
          MapRM(pb->ensure_grad().data() + static_cast<std::int64_t>(i) * K * N, K, N) +=
              CMapRM(pa->value.data() + static_cast<std::int64_t>(i) * M * K, M, K).transpose() * g;
      }
    };
  }
  return Var(n);
}

Var linear(const Var& x, const Var& w, const Var& b) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  if (wv.rank() != 2 || xv.dim(xv.rank() - 1) != wv.dim(0))
    throw ShapeMismatch("linear: feature dim mismatch");
  int Cin = wv.dim(0), Cout = wv.dim(1);
  std::int64_t rows = xv.numel() / Cin;
  std::vector<int> out_shape = xv.shape();
  out_shape.back() = Cout;
  Tensor out(out_shape);
  MapRM om(out.data(), rows, Cout);
  om = CMapRM(xv.data(), rows, Cin) * CMapRM(wv.data(), Cin, Cout);
  if (b.defined()) {
    if (b.value().numel() != Cout) throw ShapeMismatch("linear: bias size");
    for (std::int64_t r = 0; r < rows; ++r)
      for (int c = 0; c < Cout; ++c) out[r * Cout + c] += b.value()[c];
  }
  auto n = new_node(std::move(out), {x, w, b});
  if (n->requires_grad) {
    Node* self = n.get();
    auto px = x.node(), pw = w.node();
    auto pb = b.defined() ? b.node() : nullptr;
    n->backward = [self, px, pw, pb, rows, Cin, Cout] {
      CMapRM g(self->grad.data(), rows, Cout);
      if (px->requires_grad)
        MapRM(px->ensure_grad().data(), rows, Cin) +=
            g * CMapRM(pw->value.data(), Cin, Cout).transpose();
      if (pw->requires_grad)
        MapRM(pw->ensure_grad().data(), Cin, Cout) +=
            CMapRM(px->value.data(), rows, Cin).transpose() * g;
      if (pb && pb->requires_grad) {
        Tensor& gb = pb->ensure_grad();
        for (std::int64_t r = 0; r < rows; ++r)
          for (int c = 0; c < Cout; ++c) gb[c] += self->grad[r * Cout + c];
      }
    };
  }
  return Var(n);
}

// ---------------------------------------------------------------------------
// reductions / softmax
// ---------------------------------------------------------------------------

Var sum_all(const Var& x) {
  double acc = 0.0;
  for (std::int64_t i = 0; i < x.value().numel(); ++i) acc += x.value()[i];
  Tensor out({1});
  out[0] = static_cast<float>(acc);
  auto n = new_node(std::move(out), {x});
  if (n->requires_grad) {
    Node* self = n.get();
    auto px = x.node();
    n->backward = [self, px] {
      Tensor& gx = px->ensure_grad();
      float g = self->grad[0];
      for (std::int64_t i = 0; i < gx.numel(); ++i) gx[i] += g;
    };
  }
  return Var(n);
}

Var mean_all(const Var& x) {
  return scale(sum_all(x), 1.0f / static_cast<float>(x.value().numel()));
}

namespace {
// Softmax over contiguous rows of length `len` starting at stride `row_stride`
// with inner stride `inner`. Covers both channel-dim (NCHW) and last-dim cases.
Var softmax_strided(const Var& x, std::int64_t n_rows, std::int64_t len,
                    std::int64_t outer_stride, std::int64_t inner_stride,
                    std::int64_t n_inner) {
  const Tensor& xv = x.value();
  Tensor out(xv.shape());
  auto apply = [&](const Tensor& src, Tensor& dst) {
    for (std::int64_t r = 0; r < n_rows; ++r)
      for (std::int64_t j = 0; j < n_inner; ++j) {
        std::int64_t base = r * outer_stride + j;
        float mx = -1e30f;
        for (std::int64_t k = 0; k < len; ++k)
          mx = std::max(mx, src[base + k * inner_stride]);
        float denom = 0.0f;
        for (std::int64_t k = 0; k < len; ++k) {
          float e = std::exp(src[base + k * inner_stride] - mx);
          dst[base + k * inner_stride] = e;
          denom += e;
        }
        for (std::int64_t k = 0; k < len; ++k)
          dst[base + k * inner_stride] /= denom;
      }
  };
  apply(xv, out);
  auto n = new_node(std::move(out), {x});
  if (n->requires_grad) {
    Node* self = n.get();
    auto px = x.node();
    n->backward = [self, px, n_rows, len, outer_stride, inner_stride, n_inner] {
      Tensor& gx = px->ensure_grad();
      const Tensor& y = self->value;
      const Tensor& g = self->grad;
      for (std::int64_t r = 0; r < n_rows; ++r)
        for (std::int64_t j = 0; j < n_inner; ++j) {
          std::int64_t base = r * outer_stride + j;
          float dot = 0.0f;
          for (std::int64_t k = 0; k < len; ++k)
            dot += g[base + k * inner_stride] * y[base + k * inner_stride];
          for (std::int64_t k = 0; k < len; ++k) {
            std::int64_t idx = base + k * inner_stride;
            gx[idx] += y[idx] * (g[idx] - dot);
          }
        }
    };
  }
  return Var(n);
}
}  // namespace

Var softmax_dim1(const Var& x) {
  const Tensor& xv = x.value();
  if (xv.rank() != 4) throw ShapeMismatch("softmax_dim1: expected NCHW");
  std::int64_t B = xv.dim(0), C = xv.dim(1);
  std::int64_t plane = static_cast<std::int64_t>(xv.dim(2)) * xv.dim(3);
  return softmax_strided(x, B, C, C * plane, plane, plane);
}

Var softmax_lastdim(const Var& x) {
  const Tensor& xv = x.value();
  std::int64_t len = xv.dim(xv.rank() - 1);
  std::int64_t rows = xv.numel() / len;
  return softmax_strided(x, rows, len, len, 1, 1);
}

// ---------------------------------------------------------------------------
// normalization
// ---------------------------------------------------------------------------

Var norm_inner(const Var& x, std::int64_t inner, float eps) {
  const Tensor& xv = x.value();
  if (inner <= 0 || xv.numel() % inner != 0)
    throw ShapeMismatch("norm_inner: inner size must divide numel");
  std::int64_t blocks = xv.numel() / inner;
  Tensor out(xv.shape());
  std::vector<float> inv_std(static_cast<std::size_t>(blocks));
  for (std::int64_t b = 0; b < blocks; ++b) {
    const float* src = xv.data() + b * inner;
    double mean = 0.0;
    for (std::int64_t i = 0; i < inner; ++i) mean += src[i];
    mean /= static_cast<double>(inner);
    double var = 0.0;
    for (std::int64_t i = 0; i < inner; ++i) {
      double d = src[i] - mean;
      var += d * d;
    }
    var /= static_cast<double>(inner);
    float istd = 1.0f / std::sqrt(static_cast<float>(var) + eps);
    inv_std[static_cast<std::size_t>(b)] = istd;
    float* dst = out.data() + b * inner;
    for (std::int64_t i = 0; i < inner; ++i)
      dst[i] = (src[i] - static_cast<float>(mean)) * istd;
  }
  auto n = new_node(std::move(out), {x});
  if (n->requires_grad) {
    Node* self = n.get();
    auto px = x.node();
    n->backward = [self, px, blocks, inner, inv_std = std::move(inv_std)] {
      Tensor& gx = px->ensure_grad();
      const Tensor& y = self->value;  // normalized values
      const Tensor& g = self->grad;
      for (std::int64_t b = 0; b < blocks; ++b) {
        const float* gb = g.data() + b * inner;
        const float* yb = y.data() + b * inner;
        double gmean = 0.0, gymean = 0.0;
        for (std::int64_t i = 0; i < inner; ++i) {
          gmean += gb[i];
          gymean += gb[i] * yb[i];
        }
        gmean /= static_cast<double>(inner);
        gymean /= static_cast<double>(inner);
        float istd = inv_std[static_cast<std::size_t>(b)];
        float* dst = gx.data() + b * inner;
        for (std::int64_t i = 0; i < inner; ++i)
          dst[i] += istd * (gb[i] - static_cast<float>(gmean) -
                            yb[i] * static_cast<float>(gymean));
      }
    };
  }
  return Var(n);
}

Var scale_channels(const Var& x, const Var& gamma, const Var& beta) {
  const Tensor& xv = x.value();
  if (xv.rank() != 4) throw ShapeMismatch("scale_channels: expected NCHW");
  int B = xv.dim(0), C = xv.dim(1);
  std::int64_t plane = static_cast<std::int64_t>(xv.dim(2)) * xv.dim(3);
  if (gamma.value().numel() != C || beta.value().numel() != C)
    throw ShapeMismatch("scale_channels: affine size mismatch");
  Tensor out(xv.shape());
  for (int nidx = 0; nidx < B; ++nidx)
    for (int c = 0; c < C; ++c) {
      std::int64_t base = (static_cast<std::int64_t>(nidx) * C + c) * plane;
      float gmul = gamma.value()[c], badd = beta.value()[c];
      for (std::int64_t i = 0; i < plane; ++i)
        out[base + i] = xv[base + i] * gmul + badd;
    }
  auto n = new_node(std::move(out), {x, gamma, beta});
  if (n->requires_grad) {
    Node* self = n.get();
    auto px = x.node(), pg = gamma.node(), pb = beta.node();
    n->backward = [self, px, pg, pb, B, C, plane] {
      const Tensor& g = self->grad;
      for (int nidx = 0; nidx < B; ++nidx)
        for (int c = 0; c < C; ++c) {
          std::int64_t base = (static_cast<std::int64_t>(nidx) * C + c) * plane;
          if (px->requires_grad) {
            Tensor& gx = px->ensure_grad();
            float gmul = pg->value[c];
            for (std::int64_t i = 0; i < plane; ++i)
              gx[base + i] += g[base + i] * gmul;
          }
          if (pg->requires_grad) {
            Tensor& gg = pg->ensure_grad();
            double acc = 0.0;
            for (std::int64_t i = 0; i < plane; ++i)
              acc += g[base + i] * px->value[base + i];
            gg[c] += static_cast<float>(acc);
          }
          if (pb->requires_grad) {
            Tensor& gb = pb->ensure_grad();
            double acc = 0.0;
            for (std::int64_t i = 0; i < plane; ++i) acc += g[base + i];
            gb[c] += static_cast<float>(acc);
          }
        }
    };
  }
  return Var(n);
}

Var scale_lastdim(const Var& x, const Var& gamma, const Var& beta) {
  const Tensor& xv = x.value();
  std::int64_t C = xv.dim(xv.rank() - 1);
  if (gamma.value().numel() != C || beta.value().numel() != C)
    throw ShapeMismatch("scale_lastdim: affine size mismatch");
  std::int64_t rows = xv.numel() / C;
  Tensor out(xv.shape());
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < C; ++c)
      out[r * C + c] = xv[r * C + c] * gamma.value()[c] + beta.value()[c];
  auto n = new_node(std::move(out), {x, gamma, beta});
  if (n->requires_grad) {
    Node* self = n.get();
    auto px = x.node(), pg = gamma.node(), pb = beta.node();
    n->backward = [self, px, pg, pb, rows, C] {
      const Tensor& g = self->grad;
      for (std::int64_t r = 0; r < rows; ++r)
        for (std::int64_t c = 0; c < C; ++c) {
          std::int64_t idx = r * C + c;
          if (px->requires_grad) px->ensure_grad()[idx] += g[idx] * pg->value[c];
          if (pg->requires_grad) pg->ensure_grad()[c] += g[idx] * px->value[idx];
          if (pb->requires_grad) pb->ensure_grad()[c] += g[idx];
        }
    };
  }
  return Var(n);
}

// ---------------------------------------------------------------------------
// convolution
// ---------------------------------------------------------------------------

namespace {

struct ConvDims {
  int B, Cin, H, W, Cout, kh, kw, stride, pad, groups, Ho, Wo;
  int cin_g() const { return Cin / groups; }
  int cout_g() const { return Cout / groups; }
  std::int64_t col_rows() const {
    return static_cast<std::int64_t>(cin_g()) * kh * kw;
  }
  std::int64_t out_plane() const { return static_cast<std::int64_t>(Ho) * Wo; }
};

// col: (cin_g*kh*kw, Ho*Wo) for one image / one group.
void im2col(const float* img, const ConvDims& d, int group, float* col) {
  const int cin_g = d.cin_g();
  for (int c = 0; c < cin_g; ++c) {
    const float* plane =
        img + static_cast<std::int64_t>(group * cin_g + c) * d.H * d.W;
    for (int ky = 0; ky < d.kh; ++ky)
      for (int kx = 0; kx < d.kw; ++kx) {
        float* dst = col + (static_cast<std::int64_t>(c) * d.kh * d.kw +
                            ky * d.kw + kx) *
                               d.out_plane();
        for (int oy = 0; oy < d.Ho; ++oy) {
          int iy = oy * d.stride + ky - d.pad;
          for (int ox = 0; ox < d.Wo; ++ox) {
            int ix = ox * d.stride + kx - d.pad;
            dst[static_cast<std::int64_t>(oy) * d.Wo + ox] =
                (iy >= 0 && iy < d.H && ix >= 0 && ix < d.W)
                    ? plane[static_cast<std::int64_t>(iy) * d.W + ix]
                    : 0.0f;
          }
        }
      }
  }
}

void col2im_accum(const float* col, const ConvDims& d, int group, float* img) {
  const int cin_g = d.cin_g();
  for (int c = 0; c < cin_g; ++c) {
    float* plane = img + static_cast<std::int64_t>(group * cin_g + c) * d.H * d.W;
    for (int ky = 0; ky < d.kh; ++ky)
      for (int kx = 0; kx < d.kw; ++kx) {
        const float* src = col + (static_cast<std::int64_t>(c) * d.kh * d.kw +
                                  ky * d.kw + kx) *
                                     d.out_plane();
        for (int oy = 0; oy < d.Ho; ++oy) {
          int iy = oy * d.stride + ky - d.pad;
          if (iy < 0 || iy >= d.H) continue;
          for (int ox = 0; ox < d.Wo; ++ox) {
            int ix = ox * d.stride + kx - d.pad;
            if (ix < 0 || ix >= d.W) continue;
            plane[static_cast<std::int64_t>(iy) * d.W + ix] +=
                src[static_cast<std::int64_t>(oy) * d.Wo + ox];
          }
        }
      }
  }
}

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad,
           int groups) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  if (xv.rank() != 4 || wv.rank() != 4)
    throw ShapeMismatch("conv2d: expected 4-d input and weight");
  ConvDims d;
  d.B = xv.dim(0);
  d.Cin = xv.dim(1);
  d.H = xv.dim(2);
  d.W = xv.dim(3);
  d.Cout = wv.dim(0);
  d.kh = wv.dim(2);
  d.kw = wv.dim(3);
  d.stride = stride;
  d.pad = pad;
  d.groups = groups;
  if (d.Cin % groups != 0 || d.Cout % groups != 0 ||
      wv.dim(1) != d.Cin / groups)
    throw ShapeMismatch("conv2d: channel/group mismatch");
  d.Ho = (d.H + 2 * pad - d.kh) / stride + 1;
  d.Wo = (d.W + 2 * pad - d.kw) / stride + 1;
  if (d.Ho <= 0 || d.Wo <= 0) throw ShapeMismatch("conv2d: empty output");

  Tensor out({d.B, d.Cout, d.Ho, d.Wo});
  std::vector<float> col(static_cast<std::size_t>(d.col_rows() * d.out_plane()));
  const std::int64_t w_gsize = static_cast<std::int64_t>(d.cout_g()) * d.col_rows();
  for (int nidx = 0; nidx < d.B; ++nidx) {
    const float* img = xv.data() + static_cast<std::int64_t>(nidx) * d.Cin * d.H * d.W;
    float* out_img =
        out.data() + static_cast<std::int64_t>(nidx) * d.Cout * d.out_plane();
    for (int g = 0; g < d.groups; ++g) {
      im2col(img, d, g, col.data());
      MapRM om(out_img + static_cast<std::int64_t>(g) * d.cout_g() * d.out_plane(),
               d.cout_g(), d.out_plane());
      om = CMapRM(wv.data() + g * w_gsize, d.cout_g(), d.col_rows()) *
           CMapRM(col.data(), d.col_rows(), d.out_plane());
    }
    if (b.defined())
      for (int c = 0; c < d.Cout; ++c) {
        float bias = b.value()[c];
        float* dst = out_img + static_cast<std::int64_t>(c) * d.out_plane();
        for (std::int64_t i = 0; i < d.out_plane(); ++i) dst[i] += bias;
      }
  }

  auto n = new_node(std::move(out), {x, w, b});
  if (n->requires_grad) {
    Node* self = n.get();
    auto px = x.node(), pw = w.node();
    auto pb = b.defined() ? b.node() : nullptr;
    n->backward = [self, px, pw, pb, d, w_gsize] {
      const Tensor& g = self->grad;
      std::vector<float> col(static_cast<std::size_t>(d.col_rows() * d.out_plane()));
      std::vector<float> dcol(col.size());
      for (int nidx = 0; nidx < d.B; ++nidx) {
        const float* img =
            px->value.data() + static_cast<std::int64_t>(nidx) * d.Cin * d.H * d.W;
        const float* g_img =
            g.data() + static_cast<std::int64_t>(nidx) * d.Cout * d.out_plane();
        for (int grp = 0; grp < d.groups; ++grp) {
          CMapRM gm(g_img + static_cast<std::int64_t>(grp) * d.cout_g() * d.out_plane(),
                    d.cout_g(), d.out_plane());
          if (pw->requires_grad || px->requires_grad)
            im2col(img, d, grp, col.data());
          if (pw->requires_grad) {
            MapRM(pw->ensure_grad().data() + grp * w_gsize, d.cout_g(), d.col_rows()) +=
                gm * CMapRM(col.data(), d.col_rows(), d.out_plane()).transpose();
          }
          if (px->requires_grad) {
            MapRM(dcol.data(), d.col_rows(), d.out_plane()) =
                CMapRM(pw->value.data() + grp * w_gsize, d.cout_g(), d.col_rows())
                    .transpose() *
                gm;
            col2im_accum(dcol.data(), d, grp,
                         px->ensure_grad().data() +
                             static_cast<std::int64_t>(nidx) * d.Cin * d.H * d.W);
          }
        }
        if (pb && pb->requires_grad) {
          Tensor& gb = pb->ensure_grad();
          for (int c = 0; c < d.Cout; ++c) {
            const float* src = g_img + static_cast<std::int64_t>(c) * d.out_plane();
            double acc = 0.0;
            for (std::int64_t i = 0; i < d.out_plane(); ++i) acc += src[i];
            gb[c] += static_cast<float>(acc);
          }
        }
      }
    };
  }
  return Var(n);
}

// ---------------------------------------------------------------------------
// patch folding
// ---------------------------------------------------------------------------

namespace {
// Walks the bijection between (B,C,H,W) and (B*M*N,C,ph,pw) element offsets.
template <typename F>
void for_each_patch_elem(int B, int C, int H, int W, int ph, int pw, F&& f) {
  int M = H / ph, N = W / pw;
  for (int b = 0; b < B; ++b)
    for (int r = 0; r < M; ++r)
      for (int cidx = 0; cidx < N; ++cidx) {
        std::int64_t patch_idx =
            (static_cast<std::int64_t>(b) * M + r) * N + cidx;
        for (int ch = 0; ch < C; ++ch)
          for (int y = 0; y < ph; ++y) {
            std::int64_t soff =
                ((static_cast<std::int64_t>(b) * C + ch) * H + (r * ph + y)) *
                    W +
                static_cast<std::int64_t>(cidx) * pw;
            std::int64_t poff = ((patch_idx * C + ch) * ph + y) * pw;
            for (int xx = 0; xx < pw; ++xx) f(soff + xx, poff + xx);
          }
      }
}
}  // namespace

Var space_to_patches(const Var& x, int ph, int pw) {
  const Tensor& xv = x.value();
  if (xv.rank() != 4) throw ShapeMismatch("space_to_patches: expected NCHW");
  int B = xv.dim(0), C = xv.dim(1), H = xv.dim(2), W = xv.dim(3);
  if (H % ph != 0 || W % pw != 0)
    throw NonDivisibleGrid("space_to_patches: patch size must divide image");
  int M = H / ph, N = W / pw;
  Tensor out({B * M * N, C, ph, pw});
  for_each_patch_elem(B, C, H, W, ph, pw, [&](std::int64_t s, std::int64_t p) {
    out[p] = xv[s];
  });
  auto n = new_node(std::move(out), {x});
  if (n->requires_grad) {
    Node* self = n.get();
    auto px = x.node();
    n->backward = [self, px, B, C, H, W, ph, pw] {
      Tensor& gx = px->ensure_grad();
      const Tensor& g = self->grad;
      for_each_patch_elem(B, C, H, W, ph, pw,
                          [&](std::int64_t s, std::int64_t p) { gx[s] += g[p]; });
    };
  }
  return Var(n);
}

Var patches_to_space(const Var& x, int batch, int rows, int cols) {
  const Tensor& xv = x.value();
  if (xv.rank() != 4 || xv.dim(0) != batch * rows * cols)
    throw ShapeMismatch("patches_to_space: patch count mismatch");
  int C = xv.dim(1), ph = xv.dim(2), pw = xv.dim(3);
  int H = rows * ph, W = cols * pw;
  Tensor out({batch, C, H, W});
  for_each_patch_elem(batch, C, H, W, ph, pw,
                      [&](std::int64_t s, std::int64_t p) { out[s] = xv[p]; });
  auto n = new_node(std::move(out), {x});
  if (n->requires_grad) {
    Node* self = n.get();
    auto px = x.node();
    n->backward = [self, px, batch, C, H, W, ph, pw] {
      Tensor& gx = px->ensure_grad();
      const Tensor& g = self->grad;
      for_each_patch_elem(batch, C, H, W, ph, pw,
                          [&](std::int64_t s, std::int64_t p) { gx[p] += g[s]; });
    };
  }
  return Var(n);
}

}  // namespace magnifier::nn
