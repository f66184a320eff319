#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "loss_oracle.hpp"
#include "magnifier/auf_loss.hpp"
#include "testing_util.hpp"

using namespace magnifier;
using nn::Tensor;
using nn::Var;

namespace {

// Lays out a pixel list as a (1,2,H,1) prob tensor plus its target mask.
struct Batch {
  Tensor probs;
  Tensor target;
};

Batch make_batch(const std::vector<loss_oracle::Pixel>& pixels) {
  int n = static_cast<int>(pixels.size());
  Batch b{Tensor({1, 2, n, 1}), Tensor({1, n, 1})};
  for (int i = 0; i < n; ++i) {
    b.probs.at(0, 1, i, 0) = static_cast<float>(pixels[i].p_rare);
    b.probs.at(0, 0, i, 0) = static_cast<float>(1.0 - pixels[i].p_rare);
    b.target[i] = pixels[i].gt_rare ? 1.0f : 0.0f;
  }
  return b;
}

std::vector<loss_oracle::Pixel> random_pixels(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pd(0.05, 0.95);
  std::bernoulli_distribution gd(0.3);
  std::vector<loss_oracle::Pixel> px(static_cast<std::size_t>(n));
  for (auto& p : px) p = {pd(rng), gd(rng)};
  return px;
}

}  // namespace

TEST_CASE("maF matches the frozen scalar oracle cases") {
  // Single rare pixel, p_r = 0.5, delta = 0.6: -0.6 ln 0.5.
  auto b1 = make_batch({{0.5, true}});
  double got1 = loss::modified_asymmetric_focal(Var(b1.probs), b1.target, 0.6f,
                                               0.1f)
                    .value()[0];
  CHECK(got1 == doctest::Approx(0.41588830).epsilon(1e-6));
  CHECK(got1 == doctest::Approx(loss_oracle::maf({{0.5, true}}, 0.6, 0.1)));

  // Single common pixel, p_c = 0.5: 0.4 * 0.5^0.1 * ln 2.
  auto b2 = make_batch({{0.5, false}});
  double got2 = loss::modified_asymmetric_focal(Var(b2.probs), b2.target, 0.6f,
                                               0.1f)
                    .value()[0];
  CHECK(got2 == doctest::Approx(0.4 * std::pow(0.5, 0.1) * std::log(2.0))
                    .epsilon(1e-6));
}

TEST_CASE("maF is ~0 at a perfect confident prediction") {
  auto b = make_batch({{1.0, true}, {0.0, false}});
  double got =
      loss::modified_asymmetric_focal(Var(b.probs), b.target, 0.6f, 0.1f)
          .value()[0];
  CHECK(got >= 0.0);
  CHECK(got <= 10.0 * loss_oracle::kEps);
}

TEST_CASE("mTI matches the 2-pixel derived case and its boundaries") {
  // {(p_r=0.8, g_r), (p_r=0.3, g_c)}, delta=0.6 -> 0.8/(0.8+0.18+0.08).
  auto b = make_batch({{0.8, true}, {0.3, false}});
  double got =
      loss::modified_tversky_index(Var(b.probs), b.target, 0.6f, 1).value()[0];
  CHECK(got == doctest::Approx(0.8 / 1.06).epsilon(1e-6));

  auto perfect = make_batch({{1.0, true}, {0.0, false}});
  CHECK(loss::modified_tversky_index(Var(perfect.probs), perfect.target, 0.6f, 1)
            .value()[0] == doctest::Approx(1.0).epsilon(1e-5));

  // p_r = 1 everywhere, all targets common: numerator ~0.
  auto wrong = make_batch({{1.0, false}, {1.0, false}});
  CHECK(loss::modified_tversky_index(Var(wrong.probs), wrong.target, 0.6f, 1)
            .value()[0] < 1e-5);
}

TEST_CASE("maFT composition and gamma=0 reduction") {
  std::mt19937_64 rng(21);
  auto px = random_pixels(12, rng);
  auto b = make_batch(px);

  double got = loss::modified_asymmetric_focal_tversky(Var(b.probs), b.target,
                                                       0.6f, 0.1f)
                   .value()[0];
  CHECK(got == doctest::Approx(loss_oracle::maft(px, 0.6, 0.1)).epsilon(1e-5));

  // Against the spec example pattern: mti values of 0.75 give 0.25 + 0.25^0.9.
  double mti_r = loss_oracle::mti(px, 0.6, true);
  double mti_c = loss_oracle::mti(px, 0.6, false);
  CHECK(got == doctest::Approx((1.0 - mti_c) + std::pow(1.0 - mti_r, 0.9))
                   .epsilon(1e-5));

  double sym = loss::modified_asymmetric_focal_tversky(Var(b.probs), b.target,
                                                       0.6f, 0.0f)
                   .value()[0];
  CHECK(sym == doctest::Approx((1.0 - mti_c) + (1.0 - mti_r)).epsilon(1e-5));

  auto perfect = make_batch({{1.0, true}, {0.0, false}});
  CHECK(loss::modified_asymmetric_focal_tversky(Var(perfect.probs),
                                                perfect.target, 0.6f, 0.1f)
            .value()[0] < 1e-5);
}

TEST_CASE("auf_loss is the exact convex combination of its components") {
  std::mt19937_64 rng(22);
  auto px = random_pixels(10, rng);
  auto b = make_batch(px);

  loss::LossConfig cfg;
  cfg.lambda = 1.0f;
  CHECK(loss::auf_loss(Var(b.probs), b.target, cfg).value()[0] ==
        doctest::Approx(loss::modified_asymmetric_focal(Var(b.probs), b.target,
                                                        cfg.delta, cfg.gamma)
                            .value()[0]));
  cfg.lambda = 0.0f;
  CHECK(loss::auf_loss(Var(b.probs), b.target, cfg).value()[0] ==
        doctest::Approx(loss::modified_asymmetric_focal_tversky(
                            Var(b.probs), b.target, cfg.delta, cfg.gamma)
                            .value()[0]));
  cfg.lambda = 0.5f;
  auto two = make_batch({{0.8, true}, {0.3, false}});
  double expect = 0.5 * loss_oracle::maf({{0.8, true}, {0.3, false}}, 0.6, 0.1) +
                  0.5 * loss_oracle::maft({{0.8, true}, {0.3, false}}, 0.6, 0.1);
  CHECK(loss::auf_loss(Var(two.probs), two.target, cfg).value()[0] ==
        doctest::Approx(expect).epsilon(1e-5));
}

TEST_CASE("analytic gradient w.r.t. logits matches finite differences") {
  std::mt19937_64 rng(23);
  loss::LossConfig cfg;
  for (int rep = 0; rep < 5; ++rep) {
    Tensor logits = testutil::random_tensor({1, 2, 4, 4}, rng, -2.0f, 2.0f);
    Tensor target({1, 4, 4});
    std::bernoulli_distribution gd(0.3);
    for (std::int64_t i = 0; i < target.numel(); ++i)
      target[i] = gd(rng) ? 1.0f : 0.0f;

    Var leaf(logits, true);
    loss::auf_loss_from_logits(leaf, target, cfg).backward();

    std::vector<float> tflat(target.data(), target.data() + target.numel());
    auto f = [&](const std::vector<float>& flat) {
      return loss_oracle::auf_from_logits(flat, tflat, cfg.lambda, cfg.delta,
                                          cfg.gamma);
    };
    std::vector<float> lflat(logits.data(), logits.data() + logits.numel());
    auto numeric = testutil::numeric_gradient(f, lflat, 1e-4);
    CHECK(testutil::max_rel_diff(leaf.grad(), numeric) < 1e-3);
  }
}

TEST_CASE("monotonicity: moving p_r toward the target never increases the loss") {
  std::mt19937_64 rng(24);
  loss::LossConfig cfg;
  auto px = random_pixels(8, rng);
  px[3].gt_rare = true;
  double prev = 1e30;
  for (double p = 0.1; p <= 0.9; p += 0.1) {
    px[3].p_rare = p;
    auto b = make_batch(px);
    double v = loss::auf_loss(Var(b.probs), b.target, cfg).value()[0];
    CHECK(v <= prev + 1e-7);
    prev = v;
  }
}

TEST_CASE("asymmetry: swapping the rare class changes the loss") {
  std::mt19937_64 rng(25);
  auto px = random_pixels(16, rng);
  auto b = make_batch(px);
  loss::LossConfig cfg;  // delta=0.6, gamma=0.1

  cfg.rare_class = 1;
  double as_is = loss::auf_loss(Var(b.probs), b.target, cfg).value()[0];
  cfg.rare_class = 0;
  double swapped = loss::auf_loss(Var(b.probs), b.target, cfg).value()[0];
  CHECK(as_is != doctest::Approx(swapped).epsilon(1e-6));
}

TEST_CASE("non-negativity on random batches") {
  std::mt19937_64 rng(26);
  loss::LossConfig cfg;
  for (int rep = 0; rep < 50; ++rep) {
    auto b = make_batch(random_pixels(6, rng));
    CHECK(loss::auf_loss(Var(b.probs), b.target, cfg).value()[0] >= 0.0f);
  }
}
