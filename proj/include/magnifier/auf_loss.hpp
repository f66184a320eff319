#pragma once

#include "magnifier/autodiff.hpp"

namespace magnifier::loss {

/// Hyper-parameters of the Asymmetric Unified Focal loss. All three live in
/// [0, 1]. `rare_class` is the channel of the under-represented (burned)
/// class.
struct LossConfig {
  float lambda = 0.5f;
  float delta = 0.6f;
  float gamma = 0.1f;
  int rare_class = 1;
};

/// Probabilities are clamped to [kProbEps, 1 - kProbEps] before any log or
/// power term.
inline constexpr float kProbEps = 1e-7f;

/// Expands a binary (B,H,W) mask into a clamped-friendly one-hot (B,2,H,W).
nn::Tensor one_hot(const nn::Tensor& mask);

/// softmax over the two class channels followed by clamping.
nn::Var probs_from_logits(const nn::Var& logits);

/// Cross-entropy family component: plain delta-weighted CE on the rare
/// class, focal-suppressed CE on the common class.
nn::Var modified_asymmetric_focal(const nn::Var& probs,
                                  const nn::Tensor& target, float delta,
                                  float gamma, int rare_class = 1);

/// Tversky overlap of `class_of_interest` with asymmetric false-positive /
/// false-negative weights; sums run over the whole batch. Returns 1 on an
/// empty batch (vacuous case).
nn::Var modified_tversky_index(const nn::Var& probs, const nn::Tensor& target,
                               float delta, int class_of_interest);

/// Overlap family component: (1 - mTI_common) + (1 - mTI_rare)^(1 - gamma).
nn::Var modified_asymmetric_focal_tversky(const nn::Var& probs,
                                          const nn::Tensor& target,
                                          float delta, float gamma,
                                          int rare_class = 1);

/// lambda * maF + (1 - lambda) * maFT on clamped probabilities.
nn::Var auf_loss(const nn::Var& probs, const nn::Tensor& target,
                 const LossConfig& config);

/// Convenience entry point for training: softmax + clamp + auf_loss.
nn::Var auf_loss_from_logits(const nn::Var& logits, const nn::Tensor& target,
                             const LossConfig& config);

}  // namespace magnifier::loss
