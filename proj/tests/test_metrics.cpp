#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "magnifier/metrics.hpp"
#include "testing_util.hpp"

using namespace magnifier;
using metrics::ConfusionCounts;
using metrics::ScoreTable;
using nn::Tensor;

namespace {

Tensor binary_mask(std::initializer_list<float> vals, int h, int w) {
  return Tensor::from({h, w}, vals);
}

ConfusionCounts counts_of(std::int64_t tp, std::int64_t fp, std::int64_t fn,
                          std::int64_t tn = 0) {
  ConfusionCounts c;
  c.tp = tp;
  c.fp = fp;
  c.fn = fn;
  c.tn = tn;
  return c;
}

}  // namespace

TEST_CASE("confusion_counts tallies the four quadrants") {
  Tensor pred = binary_mask({1, 0, 1, 0, 1, 1}, 2, 3);
  Tensor gt = binary_mask({1, 1, 0, 0, 1, 0}, 2, 3);
  auto c = metrics::confusion_counts(pred, gt);
  CHECK(c.tp == 2);
  CHECK(c.fp == 2);
  CHECK(c.fn == 1);
  CHECK(c.tn == 1);
  CHECK(c.tp + c.fp + c.fn + c.tn == 6);
}

TEST_CASE("confusion_counts rejects non-binary and mismatched inputs") {
  Tensor pred = binary_mask({1, 0, 0.5f, 0}, 2, 2);
  Tensor gt = binary_mask({1, 0, 1, 0}, 2, 2);
  CHECK_THROWS_AS(metrics::confusion_counts(pred, gt), NonBinaryInput);
  CHECK_THROWS_AS(metrics::confusion_counts(gt, pred), NonBinaryInput);
  Tensor other({2, 3});
  CHECK_THROWS_AS(metrics::confusion_counts(gt, other), ShapeMismatch);
}

TEST_CASE("f1 and iou on the frozen count cases") {
  CHECK(metrics::f1_score(counts_of(4, 0, 0)) == 1.0);
  CHECK(metrics::iou_score(counts_of(4, 0, 0)) == 1.0);

  CHECK(metrics::f1_score(counts_of(2, 1, 1)) == doctest::Approx(2.0 / 3.0));
  CHECK(metrics::iou_score(counts_of(2, 1, 1)) == doctest::Approx(0.5));

  // Degenerate: no positives anywhere scores 1 by convention.
  CHECK(metrics::f1_score(counts_of(0, 0, 0, 9)) == 1.0);
  CHECK(metrics::iou_score(counts_of(0, 0, 0, 9)) == 1.0);

  // All-wrong prediction scores 0.
  CHECK(metrics::f1_score(counts_of(0, 3, 3)) == 0.0);
  CHECK(metrics::iou_score(counts_of(0, 3, 3)) == 0.0);
}

TEST_CASE("iou never exceeds f1") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> d(0, 40);
  for (int i = 0; i < 200; ++i) {
    auto c = counts_of(d(rng), d(rng), d(rng), d(rng));
    CHECK(metrics::iou_score(c) <= metrics::f1_score(c) + 1e-12);
  }
}

TEST_CASE("mean_rank reproduces the published three-model group") {
  // Three models, six (dataset, metric) cells; middle row wins everywhere.
  ScoreTable t;
  t.algorithms = {"small", "magnifier", "large"};
  t.scores = {
      {64.8, 48.4, 72.6, 59.1, 73.3, 58.1},
      {69.7, 54.1, 79.7, 67.5, 80.2, 69.6},
      {60.5, 44.4, 74.0, 60.3, 75.5, 60.9},
  };
  auto mr = metrics::mean_rank(t);
  REQUIRE(mr.size() == 3);
  CHECK(mr[0] == doctest::Approx(8.0 / 3.0).epsilon(1e-9));
  CHECK(mr[1] == doctest::Approx(1.0));
  CHECK(mr[2] == doctest::Approx(7.0 / 3.0).epsilon(1e-9));
  // Matches the rounded published MRs {2.7, 1, 2.3}.
  CHECK(std::round(mr[0] * 10.0) / 10.0 == doctest::Approx(2.7));
  CHECK(std::round(mr[2] * 10.0) / 10.0 == doctest::Approx(2.3));
}

TEST_CASE("mean_rank handles ties with fractional ranks") {
  ScoreTable t;
  t.algorithms = {"a", "b", "c"};
  t.scores = {{1.0, 5.0}, {1.0, 3.0}, {0.5, 1.0}};
  auto mr = metrics::mean_rank(t);
  // Column 0: a and b tie for ranks 1-2 -> 1.5 each, c -> 3.
  CHECK(mr[0] == doctest::Approx((1.5 + 1.0) / 2.0));
  CHECK(mr[1] == doctest::Approx((1.5 + 2.0) / 2.0));
  CHECK(mr[2] == doctest::Approx(3.0));
}

TEST_CASE("mean_rank invariance under monotone column transforms") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  ScoreTable t;
  t.algorithms = {"a", "b", "c", "d"};
  t.scores.assign(4, std::vector<double>(5));
  for (auto& row : t.scores)
    for (auto& v : row) v = d(rng);
  auto base = metrics::mean_rank(t);

  // Strictly increasing transform of column 2.
  for (auto& row : t.scores) row[2] = std::exp(3.0 * row[2]) + 7.0;
  auto transformed = metrics::mean_rank(t);
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(base[i] == doctest::Approx(transformed[i]));
}

TEST_CASE("mean_rank requires at least two algorithms") {
  ScoreTable t;
  t.algorithms = {"solo"};
  t.scores = {{1.0, 2.0}};
  CHECK_THROWS_AS(metrics::mean_rank(t), Error);
}

TEST_CASE("aggregate_folds computes mean and population std") {
  std::vector<metrics::FoldReport> folds(4);
  double f1s[] = {0.6, 0.7, 0.8, 0.9};
  double ious[] = {0.5, 0.5, 0.6, 0.8};
  for (int i = 0; i < 4; ++i) {
    folds[i].f1 = f1s[i];
    folds[i].iou = ious[i];
  }
  auto rep = metrics::aggregate_folds(folds);
  CHECK(rep.folds.size() == 4);
  CHECK(rep.f1_mean == doctest::Approx(0.75));
  CHECK(rep.f1_std == doctest::Approx(std::sqrt(0.0125)));
  CHECK(rep.iou_mean == doctest::Approx(0.6));
  CHECK(rep.iou_std == doctest::Approx(std::sqrt(0.015)));

  // Permuting the folds leaves the aggregate unchanged.
  std::swap(folds[0], folds[3]);
  std::swap(folds[1], folds[2]);
  auto rep2 = metrics::aggregate_folds(folds);
  CHECK(rep2.f1_mean == doctest::Approx(rep.f1_mean));
  CHECK(rep2.f1_std == doctest::Approx(rep.f1_std));
  CHECK(rep2.iou_std == doctest::Approx(rep.iou_std));
}

TEST_CASE("estimate_flops doubles the MAC total and rejects custom layers") {
  flops::Plan plan;
  plan.push_back({flops::LayerDesc::Kind::kConv2d, "conv1", 1000});
  plan.push_back({flops::LayerDesc::Kind::kLinear, "fc", 234});
  plan.push_back({flops::LayerDesc::Kind::kActivation, "act", 0});
  CHECK(metrics::estimate_flops(plan) == 2 * 1234);

  plan.push_back({flops::LayerDesc::Kind::kCustom, "mystery", 1});
  CHECK_THROWS_AS(metrics::estimate_flops(plan), UnsupportedLayer);
}
