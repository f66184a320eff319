#pragma once

#include <map>
#include <optional>
#include <string>

#include "magnifier/tensor.hpp"

namespace magnifier::indices {

enum class BandRole { kNir, kSwir1, kSwir2, kRed, kRedEdge2, kRedEdge3, kNarrowNir };
enum class SensorProfile { kSentinel2_12ch, kLandsat8_8ch };
enum class IndexId { kNbr, kNbr2, kBais2 };

/// Maps semantic band roles to channel indices for a sensor profile.
class BandMap {
 public:
  static BandMap for_profile(SensorProfile profile);

  bool has(BandRole role) const { return roles_.count(role) > 0; }
  /// Throws MissingBand when the profile lacks the role.
  int channel(BandRole role) const;
  int channel_count() const { return channel_count_; }
  SensorProfile profile() const { return profile_; }

 private:
  std::map<BandRole, int> roles_;
  int channel_count_ = 0;
  SensorProfile profile_ = SensorProfile::kSentinel2_12ch;
};

struct IndexRaster {
  nn::Tensor data;  // (H,W)
  IndexId index_id = IndexId::kNbr;
};

/// Which side of the Otsu threshold is burned for each index.
enum class Polarity { kBurnedLow, kBurnedHigh };
Polarity default_polarity(IndexId id);

const char* index_name(IndexId id);
IndexId index_from_name(const std::string& name);
SensorProfile profile_from_name(const std::string& name);

/// NBR = (NIR-SWIR2)/(NIR+SWIR2); NBR2 = (SWIR1-SWIR2)/(SWIR1+SWIR2);
/// BAIS2 = (1 - sqrt(RE2*RE3*NNIR/RED)) * ((SWIR2-NNIR)/sqrt(SWIR2+NNIR) + 1).
/// Zero denominators map to 0; image is CHW.
IndexRaster compute_index(const nn::Tensor& image, IndexId id,
                          const BandMap& bands);

/// Bin edge maximizing between-class variance over an n_bins histogram,
/// ties broken toward the lower threshold. Throws ConstantRaster.
float otsu_threshold(const nn::Tensor& raster, int n_bins = 256);

/// Index + Otsu segmentation. Burned pixels are 1. On a constant (degenerate)
/// index raster, warns and returns an all-zero mask.
nn::Tensor segment_by_index(const nn::Tensor& image, IndexId id,
                            const BandMap& bands,
                            std::optional<Polarity> polarity = std::nullopt);

}  // namespace magnifier::indices
