#include "magnifier/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace magnifier::data {

namespace {

std::vector<char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int profile_channels(indices::SensorProfile p) {
  return indices::BandMap::for_profile(p).channel_count();
}

}  // namespace

DatasetIndex load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open manifest " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw BadManifest(std::string("manifest parse error: ") + e.what());
  }

  DatasetIndex index;
  try {
    index.profile = indices::profile_from_name(j.at("profile").get<std::string>());
    index.tile = j.at("tile").get<int>();
    index.channels = profile_channels(index.profile);
    fs::path root = fs::path(path).parent_path();
    for (const auto& s : j.at("samples")) {
      SampleRef ref;
      ref.id = s.at("id").get<std::string>();
      ref.image_path = (root / s.at("image").get<std::string>()).string();
      ref.mask_path = (root / s.at("mask").get<std::string>()).string();
      ref.region = s.value("region", std::string("default"));
      index.samples.push_back(std::move(ref));
    }
  } catch (const json::exception& e) {
    throw BadManifest(std::string("manifest field error: ") + e.what());
  }
  if (index.tile <= 0) throw BadManifest("manifest: non-positive tile size");

  // Eager validation: existence and exact byte sizes.
  for (const auto& s : index.samples) {
    if (!fs::exists(s.image_path)) throw MissingFile("missing " + s.image_path);
    if (!fs::exists(s.mask_path)) throw MissingFile("missing " + s.mask_path);
    auto want_img = static_cast<std::uintmax_t>(index.tile) * index.tile *
                    index.channels * sizeof(float);
    auto want_mask = static_cast<std::uintmax_t>(index.tile) * index.tile;
    if (fs::file_size(s.image_path) != want_img)
      throw ShapeMismatch("image size mismatch for " + s.id);
    if (fs::file_size(s.mask_path) != want_mask)
      throw ShapeMismatch("mask size mismatch for " + s.id);
  }
  return index;
}

void save_manifest(const DatasetIndex& index, const std::string& path) {
  fs::path root = fs::path(path).parent_path();
  json j;
  j["profile"] = indices::profile_from_name("s2") == index.profile ? "s2" : "l8";
  j["tile"] = index.tile;
  j["samples"] = json::array();
  for (const auto& s : index.samples) {
    j["samples"].push_back(
        {{"id", s.id},
         {"image", fs::relative(s.image_path, root).string()},
         {"mask", fs::relative(s.mask_path, root).string()},
         {"region", s.region}});
  }
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

nn::Tensor load_image(const DatasetIndex& index, const SampleRef& s) {
  auto bytes = read_file(s.image_path);
  const int T = index.tile, C = index.channels;
  if (bytes.size() != static_cast<std::size_t>(T) * T * C * sizeof(float))
    throw ShapeMismatch("image size mismatch for " + s.id);
  const float* hwc = reinterpret_cast<const float*>(bytes.data());
  nn::Tensor img({C, T, T});
  for (int y = 0; y < T; ++y)
    for (int x = 0; x < T; ++x)
      for (int c = 0; c < C; ++c)
        img.at(c, y, x) = hwc[(static_cast<std::int64_t>(y) * T + x) * C + c];
  return img;
}

nn::Tensor load_mask(const DatasetIndex& index, const SampleRef& s) {
  auto bytes = read_file(s.mask_path);
  const int T = index.tile;
  if (bytes.size() != static_cast<std::size_t>(T) * T)
    throw ShapeMismatch("mask size mismatch for " + s.id);
  nn::Tensor mask({T, T});
  for (std::int64_t i = 0; i < mask.numel(); ++i)
    mask[i] = static_cast<unsigned char>(bytes[static_cast<std::size_t>(i)]) ? 1.0f : 0.0f;
  return mask;
}

std::vector<const SampleRef*> FoldSplit::fold_samples(const DatasetIndex& index,
                                                      int fold) const {
  std::vector<const SampleRef*> out;
  for (const auto& s : index.samples)
    if (assignment.at(s.id) == fold) out.push_back(&s);
  return out;
}

FoldSplit make_folds(const DatasetIndex& index, int K, std::uint64_t seed,
                     FoldStrategy strategy) {
  if (K < 3) throw Error("make_folds: K must be >= 3");
  FoldSplit split;
  split.K = K;

  std::mt19937_64 rng(seed);
  if (strategy == FoldStrategy::kRandom) {
    if (static_cast<int>(index.samples.size()) < K)
      throw TooFewSamples("make_folds: fewer samples than folds");
    std::vector<std::string> ids;
    for (const auto& s : index.samples) ids.push_back(s.id);
    std::sort(ids.begin(), ids.end());
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t i = 0; i < ids.size(); ++i)
      split.assignment[ids[i]] = static_cast<int>(i % K);
  } else {
    std::map<std::string, std::vector<std::string>> by_region;
    for (const auto& s : index.samples) by_region[s.region].push_back(s.id);
    if (static_cast<int>(by_region.size()) < K)
      throw TooFewSamples("make_folds: fewer regions than folds");
    std::vector<std::string> regions;
    for (const auto& [r, _] : by_region) regions.push_back(r);
    std::shuffle(regions.begin(), regions.end(), rng);
    // Largest region first into the currently smallest fold.
    std::stable_sort(regions.begin(), regions.end(),
                     [&](const std::string& a, const std::string& b) {
                       return by_region[a].size() > by_region[b].size();
                     });
    std::vector<std::size_t> load(static_cast<std::size_t>(K), 0);
    for (const auto& r : regions) {
      int fold = static_cast<int>(
          std::min_element(load.begin(), load.end()) - load.begin());
      for (const auto& id : by_region[r]) split.assignment[id] = fold;
      load[static_cast<std::size_t>(fold)] += by_region[r].size();
    }
  }

  for (int k = 0; k < K; ++k) {
    FoldSplit::Round r;
    r.test_fold = k;
    r.val_fold = (k + 1) % K;
    for (int f = 0; f < K; ++f)
      if (f != r.test_fold && f != r.val_fold) r.train_folds.push_back(f);
    split.rounds.push_back(std::move(r));
  }
  return split;
}

namespace {

// Smooth scalar field in [-1,1] via bilinear interpolation of a coarse grid.
class SmoothField {
 public:
  SmoothField(int tile, int cell, std::mt19937_64& rng) : cell_(cell) {
    nx_ = tile / cell + 2;
    std::normal_distribution<float> d(0.0f, 1.0f);
    grid_.resize(static_cast<std::size_t>(nx_) * nx_);
    for (auto& v : grid_) v = d(rng);
  }
  float operator()(int x, int y) const {
    float fx = static_cast<float>(x) / cell_, fy = static_cast<float>(y) / cell_;
    int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
    float tx = fx - ix, ty = fy - iy;
    auto g = [&](int i, int j) { return grid_[static_cast<std::size_t>(j) * nx_ + i]; };
    return (1 - tx) * (1 - ty) * g(ix, iy) + tx * (1 - ty) * g(ix + 1, iy) +
           (1 - tx) * ty * g(ix, iy + 1) + tx * ty * g(ix + 1, iy + 1);
  }

 private:
  int cell_, nx_;
  std::vector<float> grid_;
};

struct Ellipse {
  float cx, cy, rx, ry, cos_t, sin_t;
  bool contains(int x, int y) const {
    float dx = x - cx, dy = y - cy;
    float u = (dx * cos_t + dy * sin_t) / rx;
    float v = (-dx * sin_t + dy * cos_t) / ry;
    return u * u + v * v <= 1.0f;
  }
};

}  // namespace

DatasetIndex synthesize_dataset(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.channels != 12 && spec.channels != 8)
    throw Error("synthesize_dataset: channels must be 8 or 12");
  DatasetIndex index;
  index.profile = spec.channels == 12 ? indices::SensorProfile::kSentinel2_12ch
                                      : indices::SensorProfile::kLandsat8_8ch;
  index.channels = spec.channels;
  index.tile = spec.tile;

  auto bands = indices::BandMap::for_profile(index.profile);
  const int nir = bands.channel(indices::BandRole::kNir);
  const int swir1 = bands.channel(indices::BandRole::kSwir1);
  const int swir2 = bands.channel(indices::BandRole::kSwir2);

  fs::create_directories(fs::path(spec.out_dir) / "images");
  fs::create_directories(fs::path(spec.out_dir) / "masks");

  std::mt19937_64 rng(seed);
  const int T = spec.tile;
  const float scale = static_cast<float>(T) / 128.0f;

  for (int n = 0; n < spec.n_samples; ++n) {
    // Healthy-vegetation band baseline.
    std::vector<float> base(static_cast<std::size_t>(spec.channels));
    for (int c = 0; c < spec.channels; ++c)
      base[static_cast<std::size_t>(c)] = 0.15f + 0.015f * static_cast<float>(c);
    base[static_cast<std::size_t>(nir)] = 0.55f;
    base[static_cast<std::size_t>(swir1)] = 0.30f;
    base[static_cast<std::size_t>(swir2)] = 0.22f;

    // Burn scars: ellipses until the target positive fraction is reached.
    std::vector<Ellipse> blobs;
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(T) * T, 0);
    std::int64_t positives = 0;
    const auto target =
        static_cast<std::int64_t>(spec.blob_fraction * T * T);
    std::uniform_real_distribution<float> cd(0.15f * T, 0.85f * T);
    std::uniform_real_distribution<float> rd(10.0f * scale, 24.0f * scale);
    std::uniform_real_distribution<float> ad(0.0f, 3.14159f);
    int guard = 0;
    while (positives < target && guard++ < 64) {
      float theta = ad(rng);
      Ellipse e{cd(rng), cd(rng), rd(rng), rd(rng), std::cos(theta),
                std::sin(theta)};
      blobs.push_back(e);
      positives = 0;
      for (int y = 0; y < T; ++y)
        for (int x = 0; x < T; ++x) {
          if (e.contains(x, y)) mask[static_cast<std::size_t>(y) * T + x] = 1;
          positives += mask[static_cast<std::size_t>(y) * T + x];
        }
    }

    SmoothField field(T, 16, rng);
    std::normal_distribution<float> pix(0.0f, 0.015f);

    std::vector<float> hwc(static_cast<std::size_t>(T) * T * spec.channels);
    for (int y = 0; y < T; ++y)
      for (int x = 0; x < T; ++x) {
        bool burned = mask[static_cast<std::size_t>(y) * T + x] != 0;
        float corr = 0.03f * field(x, y);
        for (int c = 0; c < spec.channels; ++c) {
          float v = base[static_cast<std::size_t>(c)];
          if (burned) {
            if (c == nir) v *= 0.35f;
            else if (c == swir1) v += 0.10f;
            else if (c == swir2) v += 0.26f;
          }
          v += corr + pix(rng) + static_cast<float>(spec.mean_shift);
          hwc[(static_cast<std::size_t>(y) * T + x) * spec.channels + c] =
              std::max(v, 0.0f);
        }
      }

    std::string id = "synth" + std::to_string(n);
    fs::path img_path = fs::path(spec.out_dir) / "images" / (id + ".raw");
    fs::path mask_path = fs::path(spec.out_dir) / "masks" / (id + ".raw");
    {
      std::ofstream out(img_path, std::ios::binary);
      out.write(reinterpret_cast<const char*>(hwc.data()),
                static_cast<std::streamsize>(hwc.size() * sizeof(float)));
    }
    {
      std::ofstream out(mask_path, std::ios::binary);
      out.write(reinterpret_cast<const char*>(mask.data()),
                static_cast<std::streamsize>(mask.size()));
    }
    SampleRef ref;
    ref.id = id;
    ref.image_path = img_path.string();
    ref.mask_path = mask_path.string();
    ref.region = "r" + std::to_string(n % std::max(spec.n_regions, 1));
    index.samples.push_back(std::move(ref));
  }

  save_manifest(index, (fs::path(spec.out_dir) / "manifest.json").string());
  return index;
}

ChannelStats compute_stats(const DatasetIndex& index,
                           const std::vector<const SampleRef*>& samples) {
  const int C = index.channels;
  ChannelStats st;
  st.mean.assign(static_cast<std::size_t>(C), 0.0);
  st.std.assign(static_cast<std::size_t>(C), 0.0);
  std::vector<double> sq(static_cast<std::size_t>(C), 0.0);
  std::int64_t n_pix = 0;
  for (const auto* s : samples) {
    nn::Tensor img = load_image(index, *s);
    const std::int64_t plane = static_cast<std::int64_t>(img.dim(1)) * img.dim(2);
    for (int c = 0; c < C; ++c) {
      const float* p = img.data() + c * plane;
      for (std::int64_t i = 0; i < plane; ++i) {
        st.mean[static_cast<std::size_t>(c)] += p[i];
        sq[static_cast<std::size_t>(c)] += static_cast<double>(p[i]) * p[i];
      }
    }
    n_pix += plane;
  }
  if (n_pix == 0) throw TooFewSamples("compute_stats: empty sample list");
  for (int c = 0; c < C; ++c) {
    st.mean[static_cast<std::size_t>(c)] /= static_cast<double>(n_pix);
    double var = sq[static_cast<std::size_t>(c)] / static_cast<double>(n_pix) -
                 st.mean[static_cast<std::size_t>(c)] * st.mean[static_cast<std::size_t>(c)];
    st.std[static_cast<std::size_t>(c)] = var > 0.0 ? std::sqrt(var) : 0.0;
  }
  return st;
}

namespace {

nn::Tensor apply_stats(const nn::Tensor& image, const ChannelStats& stats,
                       bool forward_dir) {
  if (image.rank() != 3 ||
      image.dim(0) != static_cast<int>(stats.mean.size()))
    throw ShapeMismatch("normalize: channel count mismatch");
  nn::Tensor out(image.shape());
  const std::int64_t plane = static_cast<std::int64_t>(image.dim(1)) * image.dim(2);
  for (int c = 0; c < image.dim(0); ++c) {
    double m = stats.mean[static_cast<std::size_t>(c)];
    double s = stats.std[static_cast<std::size_t>(c)];
    const float* src = image.data() + c * plane;
    float* dst = out.data() + c * plane;
    if (s == 0.0) {
      std::cerr << "warning: channel " << c << " has zero std, passed through\n";
      std::copy_n(src, plane, dst);
      continue;
    }
    for (std::int64_t i = 0; i < plane; ++i)
      dst[i] = forward_dir
                   ? static_cast<float>((src[i] - m) / s)
                   : static_cast<float>(src[i] * s + m);
  }
  return out;
}

}  // namespace

nn::Tensor normalize(const nn::Tensor& image, const ChannelStats& stats) {
  return apply_stats(image, stats, true);
}

nn::Tensor denormalize(const nn::Tensor& image, const ChannelStats& stats) {
  return apply_stats(image, stats, false);
}

}  // namespace magnifier::data
