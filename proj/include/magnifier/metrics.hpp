#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "magnifier/flops.hpp"
#include "magnifier/tensor.hpp"

namespace magnifier::metrics {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;
};

/// Pixel tallies of a binary prediction against binary ground truth.
/// Throws NonBinaryInput if any value is not exactly 0 or 1.
ConfusionCounts confusion_counts(const nn::Tensor& pred, const nn::Tensor& gt);

/// F1 = 2TP/(2TP+FP+FN); IoU = TP/(TP+FP+FN). Both are 1.0 by convention
/// when the denominator is zero (no positives in either mask).
double f1_score(const ConfusionCounts& c);
double iou_score(const ConfusionCounts& c);

/// Rectangular score matrix: one row per algorithm, one column per
/// (dataset, metric) cell. Higher scores are better.
struct ScoreTable {
  std::vector<std::string> algorithms;
  std::vector<std::vector<double>> scores;  // [algorithm][cell]
};

/// Mean rank per algorithm; rank 1 is best per column, ties get the average
/// of the tied positions.
std::vector<double> mean_rank(const ScoreTable& table);

struct FoldReport {
  double f1 = 0.0;
  double iou = 0.0;
  ConfusionCounts counts;
};

struct MetricReport {
  std::vector<FoldReport> folds;
  double f1_mean = 0.0, f1_std = 0.0;
  double iou_mean = 0.0, iou_std = 0.0;
};

/// Unweighted mean and population standard deviation across folds.
MetricReport aggregate_folds(const std::vector<FoldReport>& folds);

/// Total FLOPs of an analytic layer plan (2 x multiply-accumulates).
/// Throws UnsupportedLayer on a Custom entry.
std::uint64_t estimate_flops(const flops::Plan& plan);

}  // namespace magnifier::metrics
