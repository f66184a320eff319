#include "magnifier/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

using json = nlohmann::json;

namespace magnifier::ckpt {

namespace {

constexpr char kMagic[8] = {'M', 'A', 'G', 'C', 'K', 'P', 'T', '1'};

json config_to_json(const models::ModelConfig& c) {
  return {{"family", models::family_name(c.encoder.family)},
          {"size", models::size_name(c.encoder.size)},
          {"in_channels", c.encoder.in_channels},
          {"magnifier", c.magnifier},
          {"patch_w", c.patch_w},
          {"patch_h", c.patch_h},
          {"num_classes", c.num_classes}};
}

models::ModelConfig config_from_json(const json& j) {
  models::ModelConfig c;
  c.encoder.family = models::family_from_name(j.at("family").get<std::string>());
  c.encoder.size = models::size_from_name(j.at("size").get<std::string>());
  c.encoder.in_channels = j.at("in_channels").get<int>();
  c.magnifier = j.at("magnifier").get<bool>();
  c.patch_w = j.at("patch_w").get<int>();
  c.patch_h = j.at("patch_h").get<int>();
  c.num_classes = j.at("num_classes").get<int>();
  return c;
}

json read_header(std::ifstream& in, const std::string& path) {
  char magic[8];
  std::uint32_t header_len = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw Error("not a checkpoint file: " + path);
  std::string header(header_len, '\0');
  in.read(header.data(), header_len);
  if (!in) throw Error("truncated checkpoint header: " + path);
  try {
    return json::parse(header);
  } catch (const json::exception& e) {
    throw Error(std::string("bad checkpoint header: ") + e.what());
  }
}

}  // namespace

void save_checkpoint(const models::MagnifierModel& model,
                     const std::string& path,
                     const data::ChannelStats* stats) {
  auto named = model.named_parameters();
  json header;
  header["config"] = config_to_json(model.config());
  if (stats)
    header["stats"] = {{"mean", stats->mean}, {"std", stats->std}};
  header["tensors"] = json::array();
  std::uint64_t offset = 0;
  for (const auto& p : named) {
    header["tensors"].push_back({{"name", p.name},
                                 {"shape", p.param.value().shape()},
                                 {"offset", offset}});
    offset += static_cast<std::uint64_t>(p.param.value().numel());
  }
  std::string hs = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingFile("cannot write checkpoint " + path);
  out.write(kMagic, 8);
  auto len = static_cast<std::uint32_t>(hs.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const auto& p : named)
    out.write(reinterpret_cast<const char*>(p.param.value().data()),
              static_cast<std::streamsize>(p.param.value().numel() * sizeof(float)));
  if (!out) throw Error("failed writing checkpoint " + path);
}

models::ModelConfig read_checkpoint_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("cannot open checkpoint " + path);
  return config_from_json(read_header(in, path).at("config"));
}

data::ChannelStats read_checkpoint_stats(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("cannot open checkpoint " + path);
  json header = read_header(in, path);
  data::ChannelStats st;
  if (header.contains("stats")) {
    st.mean = header["stats"].at("mean").get<std::vector<double>>();
    st.std = header["stats"].at("std").get<std::vector<double>>();
  }
  return st;
}

std::unique_ptr<models::MagnifierModel> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("cannot open checkpoint " + path);
  json header = read_header(in, path);
  models::ModelConfig config = config_from_json(header.at("config"));

  nn::Rng rng(0);  // weights are overwritten below
  auto model = models::build_magnifier(config, rng);
  auto named = model->named_parameters();
  if (named.size() != header.at("tensors").size())
    throw Error("checkpoint tensor count mismatch: " + path);
  for (std::size_t i = 0; i < named.size(); ++i) {
    const auto& t = header.at("tensors").at(i);
    if (t.at("name").get<std::string>() != named[i].name ||
        t.at("shape").get<std::vector<int>>() != named[i].param.value().shape())
      throw Error("checkpoint tensor layout mismatch at " + named[i].name);
    nn::Tensor& dst = named[i].param.value();
    in.read(reinterpret_cast<char*>(dst.data()),
            static_cast<std::streamsize>(dst.numel() * sizeof(float)));
  }
  if (!in) throw Error("truncated checkpoint payload: " + path);
  return model;
}

}  // namespace magnifier::ckpt
