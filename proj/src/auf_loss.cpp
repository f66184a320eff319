#include "magnifier/auf_loss.hpp"

namespace magnifier::loss {

using nn::Tensor;
using nn::Var;

Tensor one_hot(const Tensor& mask) {
  if (mask.rank() != 3) throw ShapeMismatch("one_hot: expected (B,H,W) mask");
  int B = mask.dim(0), H = mask.dim(1), W = mask.dim(2);
  Tensor out({B, 2, H, W});
  std::int64_t plane = static_cast<std::int64_t>(H) * W;
  for (int b = 0; b < B; ++b)
    for (std::int64_t i = 0; i < plane; ++i) {
      int cls = mask[b * plane + i] > 0.5f ? 1 : 0;
      out[(static_cast<std::int64_t>(b) * 2 + cls) * plane + i] = 1.0f;
    }
  return out;
}

Var probs_from_logits(const Var& logits) {
  return nn::clamp(nn::softmax_dim1(logits), kProbEps, 1.0f - kProbEps);
}

namespace {

void check_probs(const Tensor& probs, const Tensor& target) {
  if (probs.rank() != 4 || probs.dim(1) != 2)
    throw ShapeMismatch("loss: probs must be (B,2,H,W)");
  if (target.rank() != 3 || target.dim(0) != probs.dim(0) ||
      target.dim(1) != probs.dim(2) || target.dim(2) != probs.dim(3))
    throw ShapeMismatch("loss: target does not match probs");
}

// Selector tensor: 1 at channel `ch` of pixels whose ground truth is
// `gt_class`, 0 elsewhere. Shaped like probs.
Tensor selector(const Tensor& target, int ch, int gt_class) {
  int B = target.dim(0), H = target.dim(1), W = target.dim(2);
  Tensor out({B, 2, H, W});
  std::int64_t plane = static_cast<std::int64_t>(H) * W;
  for (int b = 0; b < B; ++b)
    for (std::int64_t i = 0; i < plane; ++i) {
      int cls = target[b * plane + i] > 0.5f ? 1 : 0;
      if (cls == gt_class)
        out[(static_cast<std::int64_t>(b) * 2 + ch) * plane + i] = 1.0f;
    }
  return out;
}

Var masked_sum(const Var& x, Tensor mask) {
  return nn::sum_all(nn::mul(x, Var(std::move(mask))));
}

}  // namespace

Var modified_asymmetric_focal(const Var& probs, const Tensor& target,
                              float delta, float gamma, int rare_class) {
  check_probs(probs.value(), target);
  const int common = 1 - rare_class;
  const float n = static_cast<float>(target.numel());
  Var p = nn::clamp(probs, kProbEps, 1.0f - kProbEps);
  Var logp = nn::log_(p);
  // Rare class: plain delta-weighted cross-entropy, no focal suppression.
  Var rare_term = masked_sum(logp, selector(target, rare_class, rare_class));
  // Common class: (1 - p_c)^gamma suppression.
  Var focal = nn::pow_scalar(nn::add_const(nn::scale(p, -1.0f), 1.0f), gamma);
  Var common_term =
      masked_sum(nn::mul(focal, logp), selector(target, common, common));
  return nn::add(nn::scale(rare_term, -delta / n),
                 nn::scale(common_term, -(1.0f - delta) / n));
}

Var modified_tversky_index(const Var& probs, const Tensor& target, float delta,
                           int class_of_interest) {
  check_probs(probs.value(), target);
  if (target.numel() == 0) return Var(Tensor({1}, 1.0f));  // vacuous
  const int other = 1 - class_of_interest;
  Var p = nn::clamp(probs, kProbEps, 1.0f - kProbEps);
  Var tp = masked_sum(p, selector(target, class_of_interest, class_of_interest));
  Var fp = masked_sum(p, selector(target, class_of_interest, other));
  Var fn = masked_sum(p, selector(target, other, class_of_interest));
  Var denom = nn::add(tp, nn::add(nn::scale(fp, delta),
                                  nn::scale(fn, 1.0f - delta)));
  return nn::mul(tp, nn::pow_scalar(denom, -1.0f));
}

Var modified_asymmetric_focal_tversky(const Var& probs, const Tensor& target,
                                      float delta, float gamma,
                                      int rare_class) {
  const int common = 1 - rare_class;
  Var mti_c = modified_tversky_index(probs, target, delta, common);
  Var mti_r = modified_tversky_index(probs, target, delta, rare_class);
  Var common_term = nn::add_const(nn::scale(mti_c, -1.0f), 1.0f);
  // Clamp keeps the (1-gamma) power differentiable at a perfect prediction.
  Var rare_base =
      nn::clamp(nn::add_const(nn::scale(mti_r, -1.0f), 1.0f), kProbEps, 1.0f);
  return nn::add(common_term, nn::pow_scalar(rare_base, 1.0f - gamma));
}

Var auf_loss(const Var& probs, const Tensor& target, const LossConfig& config) {
  Var maf = modified_asymmetric_focal(probs, target, config.delta, config.gamma,
                                      config.rare_class);
  Var maft = modified_asymmetric_focal_tversky(probs, target, config.delta,
                                               config.gamma, config.rare_class);
  return nn::add(nn::scale(maf, config.lambda),
                 nn::scale(maft, 1.0f - config.lambda));
}

Var auf_loss_from_logits(const Var& logits, const Tensor& target,
                         const LossConfig& config) {
  return auf_loss(probs_from_logits(logits), target, config);
}

}  // namespace magnifier::loss
