#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "magnifier/autodiff.hpp"
#include "magnifier/flops.hpp"

namespace magnifier::nn {

using Rng = std::mt19937_64;

struct NamedParam {
  std::string name;
  Var param;
};

class Module {
 public:
  virtual ~Module() = default;
  virtual void collect_params(const std::string& prefix,
                              std::vector<NamedParam>& out) const = 0;

  std::vector<Var> parameters() const {
    std::vector<NamedParam> named;
    collect_params("", named);
    std::vector<Var> out;
    out.reserve(named.size());
    for (auto& p : named) out.push_back(p.param);
    return out;
  }
  std::vector<NamedParam> named_parameters() const {
    std::vector<NamedParam> named;
    collect_params("", named);
    return named;
  }
  std::int64_t parameter_count() const {
    std::int64_t n = 0;
    for (const auto& p : parameters()) n += p.value().numel();
    return n;
  }
};

class Conv2d : public Module {
 public:
  Conv2d(int in_channels, int out_channels, int kernel, int stride, int pad,
         int groups, bool bias, Rng& rng);
  Var forward(const Var& x) const;
  void collect_params(const std::string& prefix,
                      std::vector<NamedParam>& out) const override;
  std::vector<int> out_shape(const std::vector<int>& in) const;
  flops::LayerDesc describe(const std::vector<int>& in) const;

  int in_channels, out_channels, kernel, stride, pad, groups;

 private:
  Var weight_;
  Var bias_;
};

class Linear : public Module {
 public:
  Linear(int in_features, int out_features, Rng& rng);
  Var forward(const Var& x) const;
  void collect_params(const std::string& prefix,
                      std::vector<NamedParam>& out) const override;
  flops::LayerDesc describe(std::uint64_t rows) const;

  int in_features, out_features;

 private:
  Var weight_;
  Var bias_;
};

/// Per-sample channel-group normalization with learnable per-channel affine.
/// Identical in train and eval mode.
class GroupNorm : public Module {
 public:
  GroupNorm(int groups, int channels);
  Var forward(const Var& x) const;  // NCHW
  void collect_params(const std::string& prefix,
                      std::vector<NamedParam>& out) const override;

  int groups, channels;

 private:
  Var gamma_;
  Var beta_;
};

class LayerNorm : public Module {
 public:
  explicit LayerNorm(int dim);
  Var forward(const Var& x) const;  // normalizes the last dim
  void collect_params(const std::string& prefix,
                      std::vector<NamedParam>& out) const override;

  int dim;

 private:
  Var gamma_;
  Var beta_;
};

// Weight init helpers (He / Xavier normal), seeded by the caller's rng.
Tensor he_normal(std::vector<int> shape, int fan_in, Rng& rng);
Tensor xavier_normal(std::vector<int> shape, int fan_in, int fan_out, Rng& rng);

}  // namespace magnifier::nn
