#include "magnifier/optim.hpp"

#include <cmath>

namespace magnifier::nn {

AdamW::AdamW(std::vector<Var> params, Options opts)
    : params_(std::move(params)), opts_(opts) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.value().shape());
    v_.emplace_back(p.value().shape());
  }
}

void AdamW::step() {
  ++t_;
  const float bc1 = 1.0f - std::pow(opts_.beta1, static_cast<float>(t_));
  const float bc2 = 1.0f - std::pow(opts_.beta2, static_cast<float>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& w = params_[i].value();
    const Tensor& g = params_[i].grad();
    if (g.empty()) continue;
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (std::int64_t j = 0; j < w.numel(); ++j) {
      m[j] = opts_.beta1 * m[j] + (1.0f - opts_.beta1) * g[j];
      v[j] = opts_.beta2 * v[j] + (1.0f - opts_.beta2) * g[j] * g[j];
      float mhat = m[j] / bc1;
      float vhat = v[j] / bc2;
      w[j] -= opts_.lr * (mhat / (std::sqrt(vhat) + opts_.eps) +
                          opts_.weight_decay * w[j]);
    }
  }
}

void AdamW::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

float poly_lr(float base_lr, int t, int horizon) {
  if (horizon <= 0 || t >= horizon) return 0.0f;
  return base_lr * (1.0f - static_cast<float>(t) / static_cast<float>(horizon));
}

}  // namespace magnifier::nn
