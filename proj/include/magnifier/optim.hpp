#pragma once

#include <vector>

#include "magnifier/autodiff.hpp"

namespace magnifier::nn {

/// Adam with decoupled weight decay.
class AdamW {
 public:
  struct Options {
    float lr = 1e-3f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
    float weight_decay = 0.01f;
  };

  AdamW(std::vector<Var> params, Options opts);

  void set_lr(float lr) { opts_.lr = lr; }
  float lr() const { return opts_.lr; }
  void step();
  void zero_grad();

 private:
  std::vector<Var> params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  Options opts_;
  int t_ = 0;
};

/// Polynomial decay with power 1: lr(t) = lr0 * (1 - t/horizon), zero at and
/// beyond the horizon.
float poly_lr(float base_lr, int t, int horizon);

}  // namespace magnifier::nn
