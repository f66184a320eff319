#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "magnifier/auf_loss.hpp"
#include "magnifier/datasets.hpp"
#include "magnifier/metrics.hpp"
#include "magnifier/models.hpp"

namespace magnifier::harness {

struct TrainConfig {
  models::ModelConfig model;
  loss::LossConfig loss;
  float lr = 0.0f;  // 0: use the per-architecture default
  float weight_decay = 0.01f;
  int horizon = 55;     // polynomial-decay horizon, in epochs
  int max_epochs = 55;
  int batch_size = 4;
  std::uint64_t seed = 0;
  float early_stop_iou = -1.0f;  // stop once val IoU reaches this, if > 0
  std::string checkpoint_path = "model.ckpt";
};

/// Published starting LRs: transformer 0.001, residual-CNN 0.01,
/// compact-CNN 0.0001.
float default_lr(const models::ModelConfig& config);

/// In-memory split of normalized images and binary masks.
struct SampleSet {
  std::vector<nn::Tensor> images;  // CHW
  std::vector<nn::Tensor> masks;   // (H,W)
};

SampleSet load_samples(const data::DatasetIndex& index,
                       const std::vector<const data::SampleRef*>& refs,
                       const data::ChannelStats& stats);

struct TrainResult {
  std::vector<float> epoch_losses;
  double best_val_iou = 0.0;
  int best_epoch = -1;
  int epochs_run = 0;
  std::string checkpoint_path;
};

/// Trains with AdamW + poly LR (power 1), keeping the best-validation-IoU
/// checkpoint. Throws DivergenceDetected on a non-finite loss.
TrainResult train(const TrainConfig& config, const SampleSet& train_set,
                  const SampleSet& val_set,
                  const data::ChannelStats& stats);

/// Whole-set confusion aggregation of predict_mask against ground truth.
metrics::FoldReport evaluate(const models::MagnifierModel& model,
                             const SampleSet& set);

struct RoundRecord {
  data::FoldSplit::Round roles;
  data::ChannelStats stats;  // computed on train folds only
  metrics::FoldReport report;
  std::string checkpoint_path;
  TrainResult train_result;
};

struct ExperimentRecord {
  TrainConfig config;
  data::FoldSplit split;
  std::vector<RoundRecord> rounds;
  metrics::MetricReport aggregate;
  double wall_seconds = 0.0;
};

ExperimentRecord cross_validate(
    const TrainConfig& config, const data::DatasetIndex& index, int K,
    data::FoldStrategy strategy, const std::string& workdir);

void save_record(const ExperimentRecord& record, const std::string& path);

/// Evaluation-only run of a checkpoint on a foreign dataset, using the
/// checkpoint's own training statistics. fold_id < 0 evaluates everything;
/// otherwise the given fold of a deterministic K=5 random split (seed 0).
/// Throws IncompatibleProfile on a channel-count mismatch.
metrics::FoldReport transfer_evaluate(const std::string& checkpoint_path,
                                      const data::DatasetIndex& foreign_index,
                                      int fold_id = -1);

/// Flat key = value config file; unknown keys are rejected.
TrainConfig load_train_config(const std::string& path);

void write_pgm(const nn::Tensor& mask, const std::string& path);

int run_cli(int argc, const char* const* argv);

}  // namespace magnifier::harness
