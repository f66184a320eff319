#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "magnifier/flops.hpp"
#include "magnifier/layers.hpp"
#include "magnifier/patch_grid.hpp"

namespace magnifier::models {

enum class Family { kCompactCnn, kResidualCnn, kHierTransformer };
enum class Size { kSmall, kLarge };

const char* family_name(Family f);
Family family_from_name(const std::string& name);
const char* size_name(Size s);
Size size_from_name(const std::string& name);

struct EncoderSpec {
  Family family = Family::kCompactCnn;
  Size size = Size::kSmall;
  int in_channels = 12;
};

struct ModelConfig {
  EncoderSpec encoder;
  bool magnifier = true;  // false: single-branch baseline
  int patch_w = 64;
  int patch_h = 64;
  int num_classes = 2;
};

/// Feature-pyramid encoder. forward_levels returns one NCHW feature map per
/// level, finest first; channel/stride lists describe them without a forward.
class Encoder : public nn::Module {
 public:
  virtual std::vector<nn::Var> forward_levels(const nn::Var& x) const = 0;
  virtual std::vector<int> level_channels() const = 0;
  virtual std::vector<int> level_strides() const = 0;
  virtual flops::Plan plan(int h, int w) const = 0;  // per-sample MACs
};

/// Decoder over a (possibly fused) pyramid plus the raw input as a full-
/// resolution skip. Emits (B, num_classes, H, W) logits.
class Decoder : public nn::Module {
 public:
  virtual nn::Var forward(const std::vector<nn::Var>& levels,
                          const nn::Var& input) const = 0;
  virtual flops::Plan plan(int h, int w) const = 0;
};

using EncoderFactory =
    std::function<std::unique_ptr<Encoder>(const EncoderSpec&, nn::Rng&)>;
using DecoderFactory = std::function<std::unique_ptr<Decoder>(
    Family family, const std::vector<int>& level_channels,
    const std::vector<int>& level_strides, int in_channels, int num_classes,
    nn::Rng&)>;

EncoderFactory default_encoder_factory();
DecoderFactory default_decoder_factory();

struct ParamBreakdown {
  std::int64_t global_encoder = 0;
  std::int64_t patch_encoder = 0;
  std::int64_t decoder = 0;
  std::int64_t total = 0;
};

/// Dual-branch (or single-branch) segmentation model. The patch branch is
/// folded into the batch dimension, recomposed per pyramid level, and fused
/// with the global branch by channel concatenation.
class MagnifierModel : public nn::Module {
 public:
  MagnifierModel(ModelConfig config, std::unique_ptr<Encoder> global_encoder,
                 std::unique_ptr<Encoder> patch_encoder,
                 std::unique_ptr<Decoder> decoder);

  nn::Var forward(const nn::Var& batch) const;        // NCHW -> (B,K,H,W)
  nn::Tensor predict_mask(const nn::Tensor& image) const;  // CHW -> (H,W)
  ParamBreakdown parameter_breakdown() const;
  flops::Plan layer_plan(int h, int w) const;

  const ModelConfig& config() const { return config_; }
  const Encoder& global_encoder() const { return *global_; }
  const Encoder* patch_encoder() const { return patch_.get(); }
  const Decoder& decoder() const { return *decoder_; }

  void collect_params(const std::string& prefix,
                      std::vector<nn::NamedParam>& out) const override;

 private:
  ModelConfig config_;
  std::unique_ptr<Encoder> global_;
  std::unique_ptr<Encoder> patch_;  // null for single-branch models
  std::unique_ptr<Decoder> decoder_;
};

/// Builds the model, verifying that the two branches produce compatible
/// pyramids (throws IncompatibleShapes otherwise). The decoder is built at
/// the fused channel width (2x C0 per level for magnifier configs).
std::unique_ptr<MagnifierModel> build_magnifier(
    const ModelConfig& config, nn::Rng& rng,
    const EncoderFactory& encoder_factory = default_encoder_factory(),
    const DecoderFactory& decoder_factory = default_decoder_factory());

}  // namespace magnifier::models
