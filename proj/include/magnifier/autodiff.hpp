#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "magnifier/tensor.hpp"

namespace magnifier::nn {

struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void()> backward;

  Tensor& ensure_grad() {
    if (grad.empty()) grad = Tensor(value.shape());
    return grad;
  }
};

/// Handle to a node of the autodiff tape. Cheap to copy.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false)
      : n_(std::make_shared<Node>()) {
    n_->value = std::move(value);
    n_->requires_grad = requires_grad;
  }
  explicit Var(std::shared_ptr<Node> n) : n_(std::move(n)) {}

  bool defined() const { return n_ != nullptr; }
  const Tensor& value() const { return n_->value; }
  Tensor& value() { return n_->value; }
  const Tensor& grad() const { return n_->grad; }
  bool requires_grad() const { return n_->requires_grad; }
  std::shared_ptr<Node> node() const { return n_; }

  /// Runs reverse-mode accumulation from this (scalar) node.
  void backward() const;
  void zero_grad() const { n_->grad = Tensor(); }

 private:
  std::shared_ptr<Node> n_;
};

// -- elementwise ------------------------------------------------------------
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, float s);
Var add_const(const Var& x, float c);
Var relu(const Var& x);
Var gelu(const Var& x);
Var hardswish(const Var& x);
Var sigmoid(const Var& x);
Var log_(const Var& x);
Var pow_scalar(const Var& x, float p);  // requires positive inputs
Var clamp(const Var& x, float lo, float hi);

// -- shape ------------------------------------------------------------------
Var reshape(const Var& x, std::vector<int> shape);
Var permute(const Var& x, const std::vector<int>& dims);
Var concat_channels(const Var& a, const Var& b);            // NCHW, dim 1
Var upsample_nearest(const Var& x, int factor);             // NCHW

// -- linear algebra ---------------------------------------------------------
Var matmul(const Var& a, const Var& b);                     // (M,K)x(K,N)
Var bmm(const Var& a, const Var& b);                        // (B,M,K)x(B,K,N)
Var linear(const Var& x, const Var& w, const Var& b);       // x: (...,Cin), w: (Cin,Cout)

// -- reductions / softmax ---------------------------------------------------
Var sum_all(const Var& x);
Var mean_all(const Var& x);
Var softmax_dim1(const Var& x);                             // NCHW over C
Var softmax_lastdim(const Var& x);

// -- normalization ----------------------------------------------------------
/// Normalizes each contiguous block of `inner` elements to zero mean / unit
/// variance. Layer/group norms are built from this plus an affine op.
Var norm_inner(const Var& x, std::int64_t inner, float eps = 1e-5f);
Var scale_channels(const Var& x, const Var& gamma, const Var& beta);  // NCHW
Var scale_lastdim(const Var& x, const Var& gamma, const Var& beta);

// -- convolution ------------------------------------------------------------
/// x: (B,Cin,H,W), w: (Cout,Cin/groups,kh,kw), b: (Cout) or undefined.
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad,
           int groups = 1);

// -- patch folding ----------------------------------------------------------
/// (B,C,H,W) -> (B*M*N, C, ph, pw), patches in row-major grid order per sample.
Var space_to_patches(const Var& x, int ph, int pw);
/// Inverse: (B*M*N, c, h, w) -> (B, c, M*h, N*w).
Var patches_to_space(const Var& x, int batch, int rows, int cols);

}  // namespace magnifier::nn
