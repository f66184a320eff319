#pragma once

#include <memory>
#include <string>

#include "magnifier/datasets.hpp"
#include "magnifier/models.hpp"

namespace magnifier::ckpt {

/// Single-file archive: magic, JSON header (full ModelConfig, optional
/// normalization stats, named tensor manifest), then raw float32 weights.
/// Self-contained: load rebuilds the model without external context.
void save_checkpoint(const models::MagnifierModel& model,
                     const std::string& path,
                     const data::ChannelStats* stats = nullptr);

models::ModelConfig read_checkpoint_config(const std::string& path);

/// Stats stored at save time; empty vectors when the file carries none.
data::ChannelStats read_checkpoint_stats(const std::string& path);

std::unique_ptr<models::MagnifierModel> load_checkpoint(const std::string& path);

}  // namespace magnifier::ckpt
