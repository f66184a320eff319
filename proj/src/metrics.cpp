#include "magnifier/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace magnifier::metrics {

ConfusionCounts confusion_counts(const nn::Tensor& pred, const nn::Tensor& gt) {
  if (!pred.same_shape(gt))
    throw ShapeMismatch("confusion_counts: mask shapes differ");
  ConfusionCounts c;
  for (std::int64_t i = 0; i < pred.numel(); ++i) {
    float p = pred[i], g = gt[i];
    if ((p != 0.0f && p != 1.0f) || (g != 0.0f && g != 1.0f))
      throw NonBinaryInput("confusion_counts: masks must contain only 0/1");
    if (p == 1.0f && g == 1.0f)
      ++c.tp;
    else if (p == 1.0f)
      ++c.fp;
    else if (g == 1.0f)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

double f1_score(const ConfusionCounts& c) {
  std::int64_t denom = 2 * c.tp + c.fp + c.fn;
  if (denom == 0) return 1.0;
  return 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

double iou_score(const ConfusionCounts& c) {
  std::int64_t denom = c.tp + c.fp + c.fn;
  if (denom == 0) return 1.0;
  return static_cast<double>(c.tp) / static_cast<double>(denom);
}

std::vector<double> mean_rank(const ScoreTable& table) {
  const std::size_t n_algo = table.scores.size();
  if (n_algo < 2) throw Error("mean_rank: need at least 2 algorithms");
  const std::size_t n_cells = table.scores.front().size();
  for (const auto& row : table.scores)
    if (row.size() != n_cells)
      throw ShapeMismatch("mean_rank: ragged score table");

  std::vector<double> rank_sum(n_algo, 0.0);
  std::vector<std::size_t> order(n_algo);
  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return table.scores[a][cell] > table.scores[b][cell];
    });
    // Fractional ranks: tied scores share the average of their positions.
    std::size_t i = 0;
    while (i < n_algo) {
      std::size_t j = i;
      while (j + 1 < n_algo &&
             table.scores[order[j + 1]][cell] == table.scores[order[i]][cell])
        ++j;
      double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
      for (std::size_t k = i; k <= j; ++k) rank_sum[order[k]] += avg_rank;
      i = j + 1;
    }
  }
  for (double& r : rank_sum) r /= static_cast<double>(n_cells);
  return rank_sum;
}

MetricReport aggregate_folds(const std::vector<FoldReport>& folds) {
  if (folds.empty()) throw Error("aggregate_folds: no folds");
  MetricReport r;
  r.folds = folds;
  auto stats = [&](auto getter, double& mean, double& sd) {
    double m = 0.0;
    for (const auto& f : folds) m += getter(f);
    m /= static_cast<double>(folds.size());
    double var = 0.0;
    for (const auto& f : folds) {
      double d = getter(f) - m;
      var += d * d;
    }
    var /= static_cast<double>(folds.size());  // population std
    mean = m;
    sd = std::sqrt(var);
  };
  stats([](const FoldReport& f) { return f.f1; }, r.f1_mean, r.f1_std);
  stats([](const FoldReport& f) { return f.iou; }, r.iou_mean, r.iou_std);
  return r;
}

std::uint64_t estimate_flops(const flops::Plan& plan) {
  std::uint64_t total = 0;
  for (const auto& layer : plan) {
    if (layer.kind == flops::LayerDesc::Kind::kCustom)
      throw UnsupportedLayer(layer.label.empty() ? "custom layer" : layer.label);
    total += 2 * layer.macs;
  }
  return total;
}

}  // namespace magnifier::metrics
