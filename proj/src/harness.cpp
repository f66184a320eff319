#include "magnifier/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "magnifier/checkpoint.hpp"
#include "magnifier/optim.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace magnifier::harness {

float default_lr(const models::ModelConfig& config) {
  switch (config.encoder.family) {
    case models::Family::kHierTransformer: return 1e-3f;
    case models::Family::kResidualCnn: return 1e-2f;
    case models::Family::kCompactCnn: return 1e-4f;
  }
  return 1e-3f;
}

SampleSet load_samples(const data::DatasetIndex& index,
                       const std::vector<const data::SampleRef*>& refs,
                       const data::ChannelStats& stats) {
  SampleSet set;
  for (const auto* r : refs) {
    set.images.push_back(data::normalize(data::load_image(index, *r), stats));
    set.masks.push_back(data::load_mask(index, *r));
  }
  return set;
}

namespace {

// Gathers the given sample indices into one NCHW batch plus (B,H,W) targets.
void make_batch(const SampleSet& set, const std::vector<std::size_t>& order,
                std::size_t begin, std::size_t end, nn::Tensor& batch,
                nn::Tensor& target) {
  const auto& img0 = set.images[order[begin]];
  const int B = static_cast<int>(end - begin);
  const int C = img0.dim(0), H = img0.dim(1), W = img0.dim(2);
  batch = nn::Tensor({B, C, H, W});
  target = nn::Tensor({B, H, W});
  for (int b = 0; b < B; ++b) {
    const auto& img = set.images[order[begin + static_cast<std::size_t>(b)]];
    const auto& msk = set.masks[order[begin + static_cast<std::size_t>(b)]];
    std::copy_n(img.data(), img.numel(), batch.data() + static_cast<std::int64_t>(b) * img.numel());
    std::copy_n(msk.data(), msk.numel(), target.data() + static_cast<std::int64_t>(b) * msk.numel());
  }
}

}  // namespace

metrics::FoldReport evaluate(const models::MagnifierModel& model,
                             const SampleSet& set) {
  metrics::ConfusionCounts total;
  for (std::size_t i = 0; i < set.images.size(); ++i) {
    nn::Tensor pred = model.predict_mask(set.images[i]);
    auto c = metrics::confusion_counts(pred, set.masks[i]);
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
    total.tn += c.tn;
  }
  metrics::FoldReport r;
  r.counts = total;
  r.f1 = metrics::f1_score(total);
  r.iou = metrics::iou_score(total);
  return r;
}

TrainResult train(const TrainConfig& config, const SampleSet& train_set,
                  const SampleSet& val_set, const data::ChannelStats& stats) {
  if (train_set.images.empty() || val_set.images.empty())
    throw TooFewSamples("train: empty split");

  nn::Rng rng(config.seed);
  auto model = models::build_magnifier(config.model, rng);

  float base_lr = config.lr > 0.0f ? config.lr : default_lr(config.model);
  nn::AdamW::Options opts;
  opts.lr = base_lr;
  opts.weight_decay = config.weight_decay;
  nn::AdamW optimizer(model->parameters(), opts);

  TrainResult result;
  result.checkpoint_path = config.checkpoint_path;
  double best_iou = -1.0;

  std::vector<std::size_t> order(train_set.images.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    optimizer.set_lr(nn::poly_lr(base_lr, epoch, config.horizon));
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    int n_batches = 0;
    for (std::size_t b = 0; b < order.size();
         b += static_cast<std::size_t>(config.batch_size)) {
      std::size_t e = std::min(order.size(),
                               b + static_cast<std::size_t>(config.batch_size));
      nn::Tensor batch, target;
      make_batch(train_set, order, b, e, batch, target);
      nn::Var logits = model->forward(nn::Var(batch));
      nn::Var l = loss::auf_loss_from_logits(logits, target, config.loss);
      float lv = l.value()[0];
      if (!std::isfinite(lv))
        throw DivergenceDetected("non-finite loss at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(n_batches) + ", lr " +
                                 std::to_string(optimizer.lr()));
      optimizer.zero_grad();
      l.backward();
      optimizer.step();
      epoch_loss += lv;
      ++n_batches;
    }
    result.epoch_losses.push_back(static_cast<float>(epoch_loss / n_batches));
    result.epochs_run = epoch + 1;

    metrics::FoldReport val = evaluate(*model, val_set);
    if (val.iou > best_iou) {
      best_iou = val.iou;
      result.best_epoch = epoch;
      ckpt::save_checkpoint(*model, config.checkpoint_path, &stats);
    }
    if (config.early_stop_iou > 0.0f && best_iou >= config.early_stop_iou)
      break;
  }
  result.best_val_iou = best_iou;
  return result;
}

ExperimentRecord cross_validate(const TrainConfig& config,
                                const data::DatasetIndex& index, int K,
                                data::FoldStrategy strategy,
                                const std::string& workdir) {
  auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(workdir);

  ExperimentRecord record;
  record.config = config;
  record.split = data::make_folds(index, K, config.seed, strategy);

  std::vector<metrics::FoldReport> reports;
  for (int k = 0; k < K; ++k) {
    const auto& roles = record.split.rounds[static_cast<std::size_t>(k)];
    std::vector<const data::SampleRef*> train_refs;
    for (int f : roles.train_folds)
      for (const auto* s : record.split.fold_samples(index, f))
        train_refs.push_back(s);
    auto val_refs = record.split.fold_samples(index, roles.val_fold);
    auto test_refs = record.split.fold_samples(index, roles.test_fold);

    RoundRecord round;
    round.roles = roles;
    round.stats = data::compute_stats(index, train_refs);

    SampleSet train_set = load_samples(index, train_refs, round.stats);
    SampleSet val_set = load_samples(index, val_refs, round.stats);
    SampleSet test_set = load_samples(index, test_refs, round.stats);

    TrainConfig round_cfg = config;
    round_cfg.checkpoint_path =
        (fs::path(workdir) / ("round" + std::to_string(k) + ".ckpt")).string();
    round.train_result = train(round_cfg, train_set, val_set, round.stats);
    round.checkpoint_path = round_cfg.checkpoint_path;

    auto best = ckpt::load_checkpoint(round.checkpoint_path);
    round.report = evaluate(*best, test_set);
    reports.push_back(round.report);
    record.rounds.push_back(std::move(round));
    std::cerr << "round " << k << ": test F1 " << reports.back().f1 << " IoU "
              << reports.back().iou << "\n";
  }
  record.aggregate = metrics::aggregate_folds(reports);
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return record;
}

metrics::FoldReport transfer_evaluate(const std::string& checkpoint_path,
                                      const data::DatasetIndex& foreign_index,
                                      int fold_id) {
  models::ModelConfig mc = ckpt::read_checkpoint_config(checkpoint_path);
  if (mc.encoder.in_channels != foreign_index.channels)
    throw IncompatibleProfile(
        "transfer: checkpoint expects " + std::to_string(mc.encoder.in_channels) +
        " channels, dataset has " + std::to_string(foreign_index.channels));

  data::ChannelStats stats = ckpt::read_checkpoint_stats(checkpoint_path);
  if (stats.mean.empty()) {
    std::cerr << "warning: checkpoint has no stored stats, using foreign stats\n";
    std::vector<const data::SampleRef*> all;
    for (const auto& s : foreign_index.samples) all.push_back(&s);
    stats = data::compute_stats(foreign_index, all);
  }

  std::vector<const data::SampleRef*> refs;
  if (fold_id < 0) {
    for (const auto& s : foreign_index.samples) refs.push_back(&s);
  } else {
    auto split = data::make_folds(foreign_index, 5, 0, data::FoldStrategy::kRandom);
    refs = split.fold_samples(foreign_index, fold_id);
  }

  auto model = ckpt::load_checkpoint(checkpoint_path);
  return evaluate(*model, load_samples(foreign_index, refs, stats));
}

TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open config " + path);
  TrainConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos)
      throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    auto trim = [](std::string s) {
      auto a = s.find_first_not_of(" \t\r");
      auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));

    if (key == "family") cfg.model.encoder.family = models::family_from_name(val);
    else if (key == "size") cfg.model.encoder.size = models::size_from_name(val);
    else if (key == "in_channels") cfg.model.encoder.in_channels = std::stoi(val);
    else if (key == "magnifier") cfg.model.magnifier = val == "1" || val == "true";
    else if (key == "patch_w") cfg.model.patch_w = std::stoi(val);
    else if (key == "patch_h") cfg.model.patch_h = std::stoi(val);
    else if (key == "patch") cfg.model.patch_w = cfg.model.patch_h = std::stoi(val);
    else if (key == "num_classes") cfg.model.num_classes = std::stoi(val);
    else if (key == "lambda") cfg.loss.lambda = std::stof(val);
    else if (key == "delta") cfg.loss.delta = std::stof(val);
    else if (key == "gamma") cfg.loss.gamma = std::stof(val);
    else if (key == "lr") cfg.lr = std::stof(val);
    else if (key == "weight_decay") cfg.weight_decay = std::stof(val);
    else if (key == "horizon") cfg.horizon = std::stoi(val);
    else if (key == "epochs") cfg.max_epochs = std::stoi(val);
    else if (key == "batch") cfg.batch_size = std::stoi(val);
    else if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "early_stop_iou") cfg.early_stop_iou = std::stof(val);
    else if (key == "checkpoint") cfg.checkpoint_path = val;
    else throw Error("config line " + std::to_string(lineno) + ": unknown key " + key);
  }
  return cfg;
}

namespace {

json config_json(const TrainConfig& c) {
  return {{"family", models::family_name(c.model.encoder.family)},
          {"size", models::size_name(c.model.encoder.size)},
          {"in_channels", c.model.encoder.in_channels},
          {"magnifier", c.model.magnifier},
          {"patch_w", c.model.patch_w},
          {"patch_h", c.model.patch_h},
          {"lambda", c.loss.lambda},
          {"delta", c.loss.delta},
          {"gamma", c.loss.gamma},
          {"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"horizon", c.horizon},
          {"epochs", c.max_epochs},
          {"batch", c.batch_size},
          {"seed", c.seed}};
}

json report_json(const metrics::FoldReport& r) {
  return {{"f1", r.f1},
          {"iou", r.iou},
          {"tp", r.counts.tp},
          {"fp", r.counts.fp},
          {"fn", r.counts.fn},
          {"tn", r.counts.tn}};
}

}  // namespace

void save_record(const ExperimentRecord& record, const std::string& path) {
  json j;
  j["config"] = config_json(record.config);
  j["k"] = record.split.K;
  j["assignment"] = record.split.assignment;
  j["rounds"] = json::array();
  for (const auto& r : record.rounds) {
    j["rounds"].push_back(
        {{"test_fold", r.roles.test_fold},
         {"val_fold", r.roles.val_fold},
         {"train_folds", r.roles.train_folds},
         {"stats", {{"mean", r.stats.mean}, {"std", r.stats.std}}},
         {"checkpoint", r.checkpoint_path},
         {"best_epoch", r.train_result.best_epoch},
         {"best_val_iou", r.train_result.best_val_iou},
         {"epochs_run", r.train_result.epochs_run},
         {"test", report_json(r.report)}});
  }
  j["aggregate"] = {{"f1_mean", record.aggregate.f1_mean},
                    {"f1_std", record.aggregate.f1_std},
                    {"iou_mean", record.aggregate.iou_mean},
                    {"iou_std", record.aggregate.iou_std}};
  j["wall_seconds"] = record.wall_seconds;
  std::ofstream out(path);
  if (!out) throw MissingFile("cannot write record " + path);
  out << j.dump(2) << "\n";
}

void write_pgm(const nn::Tensor& mask, const std::string& path) {
  if (mask.rank() != 2) throw ShapeMismatch("write_pgm: expected (H,W)");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MissingFile("cannot write " + path);
  out << "P5\n" << mask.dim(1) << " " << mask.dim(0) << "\n255\n";
  for (std::int64_t i = 0; i < mask.numel(); ++i) {
    unsigned char v = mask[i] > 0.5f ? 255 : 0;
    out.write(reinterpret_cast<const char*>(&v), 1);
  }
}

namespace {

struct CliOverrides {
  std::string config_path;
  std::string family, size, strategy = "random";
  int epochs = -1, horizon = -1, batch = -1, patch = -1;
  double lr = -1.0, early_stop = -1.0;
  std::int64_t seed = -1;
  bool single = false;
};

void add_model_flags(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path, "key = value config file");
  cmd->add_option("--family", o.family,
                  "compact-cnn | residual-cnn | hierarchical-transformer");
  cmd->add_option("--size", o.size, "small | large");
  cmd->add_flag("--single", o.single, "single-branch baseline (no magnifier)");
  cmd->add_option("--patch", o.patch, "square patch size in pixels");
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--horizon", o.horizon, "poly LR horizon in epochs");
  cmd->add_option("--lr", o.lr, "initial learning rate");
  cmd->add_option("--batch", o.batch, "batch size");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--early-stop", o.early_stop, "stop at this validation IoU");
}

TrainConfig resolve_config(const CliOverrides& o, int channels) {
  TrainConfig cfg;
  if (!o.config_path.empty()) cfg = load_train_config(o.config_path);
  cfg.model.encoder.in_channels = channels;
  if (!o.family.empty())
    cfg.model.encoder.family = models::family_from_name(o.family);
  if (!o.size.empty()) cfg.model.encoder.size = models::size_from_name(o.size);
  if (o.single) cfg.model.magnifier = false;
  if (o.patch > 0) cfg.model.patch_w = cfg.model.patch_h = o.patch;
  if (o.epochs > 0) cfg.max_epochs = o.epochs;
  if (o.horizon > 0) cfg.horizon = o.horizon;
  if (o.lr > 0) cfg.lr = static_cast<float>(o.lr);
  if (o.batch > 0) cfg.batch_size = o.batch;
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (o.early_stop > 0) cfg.early_stop_iou = static_cast<float>(o.early_stop);
  return cfg;
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"magnifier: dual-granularity burned-area segmentation"};
  app.require_subcommand(1);

  // synth-data
  auto* synth = app.add_subcommand("synth-data", "generate a synthetic dataset");
  data::SynthSpec spec;
  std::uint64_t synth_seed = 0;
  synth->add_option("--out", spec.out_dir, "output directory")->required();
  synth->add_option("--samples", spec.n_samples, "number of tiles");
  synth->add_option("--tile", spec.tile, "tile size in pixels");
  synth->add_option("--channels", spec.channels, "8 or 12");
  synth->add_option("--regions", spec.n_regions, "number of region tags");
  synth->add_option("--blob-fraction", spec.blob_fraction, "positive fraction");
  synth->add_option("--mean-shift", spec.mean_shift, "band mean offset");
  synth->add_option("--seed", synth_seed, "RNG seed");

  // train
  auto* tr = app.add_subcommand("train", "train one model on a manifest");
  CliOverrides tr_o;
  std::string tr_manifest, tr_out = "model.ckpt";
  double tr_val_fraction = 0.2;
  tr->add_option("--manifest", tr_manifest, "dataset manifest")->required();
  tr->add_option("--out", tr_out, "checkpoint path");
  tr->add_option("--val-fraction", tr_val_fraction, "validation share");
  add_model_flags(tr, tr_o);

  // cross-validate
  auto* cv = app.add_subcommand("cross-validate", "k-fold experiment");
  CliOverrides cv_o;
  std::string cv_manifest, cv_workdir = "cv_work", cv_out;
  int cv_k = 5;
  cv->add_option("--manifest", cv_manifest, "dataset manifest")->required();
  cv->add_option("--k", cv_k, "fold count");
  cv->add_option("--strategy", cv_o.strategy, "random | by_region");
  cv->add_option("--workdir", cv_workdir, "checkpoint directory");
  cv->add_option("--out", cv_out, "record path (default workdir/record.json)");
  add_model_flags(cv, cv_o);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "evaluate a checkpoint");
  std::string ev_ckpt, ev_manifest, ev_export;
  ev->add_option("--checkpoint", ev_ckpt, "checkpoint path")->required();
  ev->add_option("--manifest", ev_manifest, "dataset manifest")->required();
  ev->add_option("--export-dir", ev_export, "write predicted masks as PGM");

  // transfer
  auto* tf = app.add_subcommand("transfer", "cross-dataset evaluation");
  std::string tf_ckpt, tf_manifest;
  int tf_fold = -1;
  tf->add_option("--checkpoint", tf_ckpt, "checkpoint path")->required();
  tf->add_option("--manifest", tf_manifest, "foreign dataset manifest")->required();
  tf->add_option("--fold", tf_fold, "fold id (-1: all samples)");

  // segment-index
  auto* si = app.add_subcommand("segment-index", "spectral index + Otsu baseline");
  std::string si_manifest, si_index = "nbr", si_polarity = "auto", si_out;
  si->add_option("--manifest", si_manifest, "dataset manifest")->required();
  si->add_option("--index", si_index, "nbr | nbr2 | bais2");
  si->add_option("--polarity", si_polarity, "auto | low | high");
  si->add_option("--out-dir", si_out, "write masks as PGM");

  // report
  auto* rp = app.add_subcommand("report", "print an experiment record");
  std::string rp_record;
  rp->add_option("--record", rp_record, "record JSON path")->required();

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    auto index = data::synthesize_dataset(spec, synth_seed);
    std::cout << "wrote " << index.samples.size() << " samples under "
              << spec.out_dir << "\n";
    return 0;
  }

  if (tr->parsed()) {
    auto index = data::load_manifest(tr_manifest);
    TrainConfig cfg = resolve_config(tr_o, index.channels);
    cfg.checkpoint_path = tr_out;

    std::vector<std::string> ids;
    for (const auto& s : index.samples) ids.push_back(s.id);
    std::sort(ids.begin(), ids.end());
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::size_t n_val = std::max<std::size_t>(
        1, static_cast<std::size_t>(tr_val_fraction * ids.size()));
    if (n_val >= ids.size()) throw TooFewSamples("train: no training samples left");
    std::vector<const data::SampleRef*> train_refs, val_refs;
    for (const auto& s : index.samples) {
      auto pos = std::find(ids.begin(), ids.end(), s.id) - ids.begin();
      (static_cast<std::size_t>(pos) < n_val ? val_refs : train_refs).push_back(&s);
    }
    auto stats = data::compute_stats(index, train_refs);
    auto result = train(cfg, load_samples(index, train_refs, stats),
                        load_samples(index, val_refs, stats), stats);
    std::cout << "best val IoU " << result.best_val_iou << " at epoch "
              << result.best_epoch << " after " << result.epochs_run
              << " epochs; checkpoint " << result.checkpoint_path << "\n";
    return 0;
  }

  if (cv->parsed()) {
    auto index = data::load_manifest(cv_manifest);
    TrainConfig cfg = resolve_config(cv_o, index.channels);
    auto strategy = cv_o.strategy == "by_region" ? data::FoldStrategy::kByRegion
                                                 : data::FoldStrategy::kRandom;
    auto record = cross_validate(cfg, index, cv_k, strategy, cv_workdir);
    std::string out = cv_out.empty()
                          ? (fs::path(cv_workdir) / "record.json").string()
                          : cv_out;
    save_record(record, out);
    std::cout << "F1 " << record.aggregate.f1_mean << " +- "
              << record.aggregate.f1_std << ", IoU "
              << record.aggregate.iou_mean << " +- "
              << record.aggregate.iou_std << "; record " << out << "\n";
    return 0;
  }

  if (ev->parsed()) {
    auto index = data::load_manifest(ev_manifest);
    auto model = ckpt::load_checkpoint(ev_ckpt);
    auto stats = ckpt::read_checkpoint_stats(ev_ckpt);
    std::vector<const data::SampleRef*> refs;
    for (const auto& s : index.samples) refs.push_back(&s);
    if (stats.mean.empty()) stats = data::compute_stats(index, refs);
    SampleSet set = load_samples(index, refs, stats);
    if (!ev_export.empty()) {
      fs::create_directories(ev_export);
      for (std::size_t i = 0; i < set.images.size(); ++i)
        write_pgm(model->predict_mask(set.images[i]),
                  (fs::path(ev_export) / (refs[i]->id + ".pgm")).string());
    }
    auto r = evaluate(*model, set);
    std::cout << "F1 " << r.f1 << " IoU " << r.iou << "\n";
    return 0;
  }

  if (tf->parsed()) {
    auto index = data::load_manifest(tf_manifest);
    auto r = transfer_evaluate(tf_ckpt, index, tf_fold);
    std::cout << "transfer F1 " << r.f1 << " IoU " << r.iou << "\n";
    return 0;
  }

  if (si->parsed()) {
    auto index = data::load_manifest(si_manifest);
    auto id = indices::index_from_name(si_index);
    auto bands = indices::BandMap::for_profile(index.profile);
    std::optional<indices::Polarity> pol;
    if (si_polarity == "low") pol = indices::Polarity::kBurnedLow;
    else if (si_polarity == "high") pol = indices::Polarity::kBurnedHigh;
    else if (si_polarity != "auto") throw Error("bad polarity: " + si_polarity);
    if (!si_out.empty()) fs::create_directories(si_out);
    metrics::ConfusionCounts total;
    for (const auto& s : index.samples) {
      nn::Tensor img = data::load_image(index, s);
      nn::Tensor pred = indices::segment_by_index(img, id, bands, pol);
      if (!si_out.empty())
        write_pgm(pred, (fs::path(si_out) / (s.id + ".pgm")).string());
      auto c = metrics::confusion_counts(pred, data::load_mask(index, s));
      total.tp += c.tp;
      total.fp += c.fp;
      total.fn += c.fn;
      total.tn += c.tn;
    }
    std::cout << si_index << ": F1 " << metrics::f1_score(total) << " IoU "
              << metrics::iou_score(total) << "\n";
    return 0;
  }

  if (rp->parsed()) {
    std::ifstream in(rp_record);
    if (!in) throw MissingFile("cannot open record " + rp_record);
    json j;
    in >> j;
    for (const auto& r : j.at("rounds"))
      std::cout << "test fold " << r.at("test_fold").get<int>() << ": F1 "
                << r.at("test").at("f1").get<double>() << " IoU "
                << r.at("test").at("iou").get<double>() << " (best epoch "
                << r.at("best_epoch").get<int>() << ")\n";
    std::cout << "aggregate: F1 " << j.at("aggregate").at("f1_mean").get<double>()
              << " +- " << j.at("aggregate").at("f1_std").get<double>()
              << ", IoU " << j.at("aggregate").at("iou_mean").get<double>()
              << " +- " << j.at("aggregate").at("iou_std").get<double>() << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  try {
    return cli_main(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace magnifier::harness
