#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "magnifier/index_baselines.hpp"
#include "magnifier/tensor.hpp"

namespace magnifier::data {

struct SampleRef {
  std::string id;
  std::string image_path;  // absolute, resolved against the manifest dir
  std::string mask_path;
  std::string region;
};

struct DatasetIndex {
  indices::SensorProfile profile = indices::SensorProfile::kSentinel2_12ch;
  int channels = 12;
  int tile = 128;
  std::vector<SampleRef> samples;
};

/// Parses and validates a JSON manifest. Image files are raw little-endian
/// float32 in HWC order, masks raw uint8; both are size-checked eagerly.
DatasetIndex load_manifest(const std::string& path);
void save_manifest(const DatasetIndex& index, const std::string& path);

nn::Tensor load_image(const DatasetIndex& index, const SampleRef& s);  // CHW
nn::Tensor load_mask(const DatasetIndex& index, const SampleRef& s);   // (H,W)

enum class FoldStrategy { kRandom, kByRegion };

struct FoldSplit {
  struct Round {
    int test_fold = 0;
    int val_fold = 0;
    std::vector<int> train_folds;
  };
  int K = 0;
  std::map<std::string, int> assignment;  // sample id -> fold
  std::vector<Round> rounds;              // K rounds, fold k tested in round k

  std::vector<const SampleRef*> fold_samples(const DatasetIndex& index,
                                             int fold) const;
};

/// Deterministic under a fixed seed. by_region never splits a region_tag
/// across folds. Throws TooFewSamples when K folds cannot be filled.
FoldSplit make_folds(const DatasetIndex& index, int K, std::uint64_t seed,
                     FoldStrategy strategy = FoldStrategy::kRandom);

struct SynthSpec {
  int n_samples = 16;
  int tile = 128;
  int channels = 12;      // 12 (s2 profile) or 8 (l8 profile)
  int n_regions = 5;
  double blob_fraction = 0.05;  // target positive-pixel fraction
  double mean_shift = 0.0;      // added to every band (transfer experiments)
  std::string out_dir;
};

/// Writes images/masks/manifest under spec.out_dir and returns the index.
/// Burned blobs depress the NIR-role band and raise the SWIR-role bands;
/// the mask is exactly the blob support.
DatasetIndex synthesize_dataset(const SynthSpec& spec, std::uint64_t seed);

struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> std;
};

/// Population statistics over the given samples (training folds only).
ChannelStats compute_stats(const DatasetIndex& index,
                           const std::vector<const SampleRef*>& samples);

/// (x - mean)/std per channel; zero-std channels pass through with a warning.
nn::Tensor normalize(const nn::Tensor& image, const ChannelStats& stats);
nn::Tensor denormalize(const nn::Tensor& image, const ChannelStats& stats);

}  // namespace magnifier::data
