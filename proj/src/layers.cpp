#include "magnifier/layers.hpp"

#include <cmath>

namespace magnifier::nn {

Tensor he_normal(std::vector<int> shape, int fan_in, Rng& rng) {
  Tensor t(shape);
  std::normal_distribution<float> dist(0.0f,
                                       std::sqrt(2.0f / static_cast<float>(fan_in)));
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = dist(rng);
  return t;
}

Tensor xavier_normal(std::vector<int> shape, int fan_in, int fan_out, Rng& rng) {
  Tensor t(shape);
  std::normal_distribution<float> dist(
      0.0f, std::sqrt(2.0f / static_cast<float>(fan_in + fan_out)));
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = dist(rng);
  return t;
}

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride,
               int pad, int groups, bool bias, Rng& rng)
    : in_channels(in_channels),
      out_channels(out_channels),
      kernel(kernel),
      stride(stride),
      pad(pad),
      groups(groups) {
  int fan_in = in_channels / groups * kernel * kernel;
  weight_ = Var(he_normal({out_channels, in_channels / groups, kernel, kernel},
                          fan_in, rng),
                true);
  if (bias) bias_ = Var(Tensor({out_channels}), true);
}

Var Conv2d::forward(const Var& x) const {
  return conv2d(x, weight_, bias_, stride, pad, groups);
}

void Conv2d::collect_params(const std::string& prefix,
                            std::vector<NamedParam>& out) const {
  out.push_back({prefix + "weight", weight_});
  if (bias_.defined()) out.push_back({prefix + "bias", bias_});
}

std::vector<int> Conv2d::out_shape(const std::vector<int>& in) const {
  int ho = (in[2] + 2 * pad - kernel) / stride + 1;
  int wo = (in[3] + 2 * pad - kernel) / stride + 1;
  return {in[0], out_channels, ho, wo};
}

flops::LayerDesc Conv2d::describe(const std::vector<int>& in) const {
  auto out = out_shape(in);
  std::uint64_t out_elems = 1;
  for (int d : out) out_elems *= static_cast<std::uint64_t>(d);
  std::uint64_t k = static_cast<std::uint64_t>(in_channels / groups) * kernel * kernel;
  return {flops::LayerDesc::Kind::kConv2d, "conv2d", out_elems * k};
}

Linear::Linear(int in_features, int out_features, Rng& rng)
    : in_features(in_features), out_features(out_features) {
  weight_ = Var(xavier_normal({in_features, out_features}, in_features,
                              out_features, rng),
                true);
  bias_ = Var(Tensor({out_features}), true);
}

Var Linear::forward(const Var& x) const { return linear(x, weight_, bias_); }

void Linear::collect_params(const std::string& prefix,
                            std::vector<NamedParam>& out) const {
  out.push_back({prefix + "weight", weight_});
  out.push_back({prefix + "bias", bias_});
}

flops::LayerDesc Linear::describe(std::uint64_t rows) const {
  return {flops::LayerDesc::Kind::kLinear, "linear",
          rows * static_cast<std::uint64_t>(in_features) * out_features};
}

GroupNorm::GroupNorm(int groups, int channels)
    : groups(groups), channels(channels) {
  if (channels % groups != 0)
    throw ShapeMismatch("GroupNorm: groups must divide channels");
  gamma_ = Var(Tensor({channels}, 1.0f), true);
  beta_ = Var(Tensor({channels}), true);
}

Var GroupNorm::forward(const Var& x) const {
  const Tensor& xv = x.value();
  if (xv.rank() != 4 || xv.dim(1) != channels)
    throw ShapeMismatch("GroupNorm: bad input");
  std::int64_t inner = static_cast<std::int64_t>(channels / groups) *
                       xv.dim(2) * xv.dim(3);
  return scale_channels(norm_inner(x, inner), gamma_, beta_);
}

void GroupNorm::collect_params(const std::string& prefix,
                               std::vector<NamedParam>& out) const {
  out.push_back({prefix + "gamma", gamma_});
  out.push_back({prefix + "beta", beta_});
}

LayerNorm::LayerNorm(int dim) : dim(dim) {
  gamma_ = Var(Tensor({dim}, 1.0f), true);
  beta_ = Var(Tensor({dim}), true);
}

Var LayerNorm::forward(const Var& x) const {
  if (x.value().dim(x.value().rank() - 1) != dim)
    throw ShapeMismatch("LayerNorm: bad input");
  return scale_lastdim(norm_inner(x, dim), gamma_, beta_);
}

void LayerNorm::collect_params(const std::string& prefix,
                               std::vector<NamedParam>& out) const {
  out.push_back({prefix + "gamma", gamma_});
  out.push_back({prefix + "beta", beta_});
}

}  // namespace magnifier::nn
