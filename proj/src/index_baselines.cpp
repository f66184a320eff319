#include "magnifier/index_baselines.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <vector>

namespace magnifier::indices {

BandMap BandMap::for_profile(SensorProfile profile) {
  BandMap m;
  m.profile_ = profile;
  switch (profile) {
    case SensorProfile::kSentinel2_12ch:
      // L2A channel order: B1,B2,B3,B4,B5,B6,B7,B8,B8A,B9,B11,B12.
      m.channel_count_ = 12;
      m.roles_ = {{BandRole::kRed, 3},      {BandRole::kRedEdge2, 5},
                  {BandRole::kRedEdge3, 6}, {BandRole::kNir, 7},
                  {BandRole::kNarrowNir, 8}, {BandRole::kSwir1, 10},
                  {BandRole::kSwir2, 11}};
      break;
    case SensorProfile::kLandsat8_8ch:
      // Channel order: B1..B7 plus panchromatic B8; no red-edge bands.
      m.channel_count_ = 8;
      m.roles_ = {{BandRole::kRed, 3},
                  {BandRole::kNir, 4},
                  {BandRole::kSwir1, 5},
                  {BandRole::kSwir2, 6}};
      break;
  }
  return m;
}

int BandMap::channel(BandRole role) const {
  auto it = roles_.find(role);
  if (it == roles_.end())
    throw MissingBand("band role not available in this sensor profile");
  return it->second;
}

Polarity default_polarity(IndexId id) {
  // Burning lowers NBR/NBR2 and raises BAIS2.
  return id == IndexId::kBais2 ? Polarity::kBurnedHigh : Polarity::kBurnedLow;
}

const char* index_name(IndexId id) {
  switch (id) {
    case IndexId::kNbr: return "nbr";
    case IndexId::kNbr2: return "nbr2";
    case IndexId::kBais2: return "bais2";
  }
  return "?";
}

IndexId index_from_name(const std::string& name) {
  if (name == "nbr") return IndexId::kNbr;
  if (name == "nbr2") return IndexId::kNbr2;
  if (name == "bais2") return IndexId::kBais2;
  throw Error("unknown index: " + name);
}

SensorProfile profile_from_name(const std::string& name) {
  if (name == "s2") return SensorProfile::kSentinel2_12ch;
  if (name == "l8") return SensorProfile::kLandsat8_8ch;
  throw Error("unknown sensor profile: " + name);
}

namespace {

inline float ratio(float num, float denom) {
  return denom == 0.0f ? 0.0f : num / denom;
}

}  // namespace

IndexRaster compute_index(const nn::Tensor& image, IndexId id,
                          const BandMap& bands) {
  if (image.rank() != 3 || image.dim(0) != bands.channel_count())
    throw ShapeMismatch("compute_index: image does not match sensor profile");
  const int H = image.dim(1), W = image.dim(2);
  IndexRaster out;
  out.index_id = id;
  out.data = nn::Tensor({H, W});

  auto band = [&](BandRole r) {
    return image.data() +
           static_cast<std::int64_t>(bands.channel(r)) * H * W;
  };

  switch (id) {
    case IndexId::kNbr: {
      const float* nir = band(BandRole::kNir);
      const float* swir2 = band(BandRole::kSwir2);
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(H) * W; ++i)
        out.data[i] = ratio(nir[i] - swir2[i], nir[i] + swir2[i]);
      break;
    }
    case IndexId::kNbr2: {
      const float* swir1 = band(BandRole::kSwir1);
      const float* swir2 = band(BandRole::kSwir2);
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(H) * W; ++i)
        out.data[i] = ratio(swir1[i] - swir2[i], swir1[i] + swir2[i]);
      break;
    }
    case IndexId::kBais2: {
      const float* red = band(BandRole::kRed);
      const float* re2 = band(BandRole::kRedEdge2);
      const float* re3 = band(BandRole::kRedEdge3);
      const float* nnir = band(BandRole::kNarrowNir);
      const float* swir2 = band(BandRole::kSwir2);
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(H) * W; ++i) {
        float prod = ratio(re2[i] * re3[i] * nnir[i], red[i]);
        float veg = 1.0f - std::sqrt(std::max(prod, 0.0f));
        float s = swir2[i] + nnir[i];
        float burn = s > 0.0f ? (swir2[i] - nnir[i]) / std::sqrt(s) + 1.0f : 0.0f;
        out.data[i] = veg * burn;
      }
      break;
    }
  }
  for (std::int64_t i = 0; i < out.data.numel(); ++i)
    if (!std::isfinite(out.data[i])) out.data[i] = 0.0f;
  return out;
}

float otsu_threshold(const nn::Tensor& raster, int n_bins) {
  float lo = std::numeric_limits<float>::max();
  float hi = std::numeric_limits<float>::lowest();
  for (std::int64_t i = 0; i < raster.numel(); ++i) {
    lo = std::min(lo, raster[i]);
    hi = std::max(hi, raster[i]);
  }
  if (raster.numel() == 0 || lo == hi)
    throw ConstantRaster("otsu_threshold: raster has fewer than 2 distinct values");

  const float width = (hi - lo) / static_cast<float>(n_bins);
  std::vector<std::int64_t> hist(static_cast<std::size_t>(n_bins), 0);
  for (std::int64_t i = 0; i < raster.numel(); ++i) {
    int b = static_cast<int>((raster[i] - lo) / width);
    b = std::min(b, n_bins - 1);
    ++hist[static_cast<std::size_t>(b)];
  }

  // Cumulative moments; split after bin t, maximizing w0*w1*(mu0-mu1)^2.
  const double total = static_cast<double>(raster.numel());
  double sum_all = 0.0;
  for (int b = 0; b < n_bins; ++b)
    sum_all += static_cast<double>(hist[static_cast<std::size_t>(b)]) * b;

  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  int best_t = 0;
  for (int t = 0; t < n_bins - 1; ++t) {
    w0 += static_cast<double>(hist[static_cast<std::size_t>(t)]);
    sum0 += static_cast<double>(hist[static_cast<std::size_t>(t)]) * t;
    double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    double mu0 = sum0 / w0;
    double mu1 = (sum_all - sum0) / w1;
    double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {  // strict: ties keep the lower threshold
      best = between;
      best_t = t;
    }
  }
  return lo + width * static_cast<float>(best_t + 1);
}

nn::Tensor segment_by_index(const nn::Tensor& image, IndexId id,
                            const BandMap& bands,
                            std::optional<Polarity> polarity) {
  IndexRaster raster = compute_index(image, id, bands);
  nn::Tensor mask({raster.data.dim(0), raster.data.dim(1)});
  float thr;
  try {
    thr = otsu_threshold(raster.data);
  } catch (const ConstantRaster&) {
    std::cerr << "warning: constant " << index_name(id)
              << " raster, emitting all-unburned mask\n";
    return mask;
  }
  Polarity pol = polarity.value_or(default_polarity(id));
  for (std::int64_t i = 0; i < raster.data.numel(); ++i) {
    bool burned = pol == Polarity::kBurnedLow ? raster.data[i] < thr
                                              : raster.data[i] >= thr;
    mask[i] = burned ? 1.0f : 0.0f;
  }
  return mask;
}

}  // namespace magnifier::indices
