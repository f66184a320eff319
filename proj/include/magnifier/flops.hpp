#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace magnifier::flops {

/// One entry of an analytic complexity plan. `macs` is the multiply-
/// accumulate count of the layer for a given input shape; FLOPs are
/// conventionally 2x that. Non-arithmetic layers carry zero MACs.
struct LayerDesc {
  enum class Kind { kConv2d, kLinear, kMatmul, kNorm, kActivation, kUpsample, kCustom };
  Kind kind = Kind::kCustom;
  std::string label;
  std::uint64_t macs = 0;
};

using Plan = std::vector<LayerDesc>;

}  // namespace magnifier::flops
