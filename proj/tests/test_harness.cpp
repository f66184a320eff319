#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "magnifier/checkpoint.hpp"
#include "magnifier/harness.hpp"

using namespace magnifier;
using harness::SampleSet;
using harness::TrainConfig;
using models::Family;
using models::Size;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("magnifier_harness_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

data::DatasetIndex synth(const fs::path& dir, int n, int tile,
                         std::uint64_t seed, double mean_shift = 0.0,
                         int channels = 12) {
  data::SynthSpec spec;
  spec.n_samples = n;
  spec.tile = tile;
  spec.channels = channels;
  spec.blob_fraction = 0.10;
  spec.mean_shift = mean_shift;
  spec.out_dir = dir.string();
  return data::synthesize_dataset(spec, seed);
}

std::vector<const data::SampleRef*> all_refs(const data::DatasetIndex& idx) {
  std::vector<const data::SampleRef*> refs;
  for (const auto& s : idx.samples) refs.push_back(&s);
  return refs;
}

TrainConfig tiny_config(const fs::path& ckpt, int patch = 16) {
  TrainConfig cfg;
  cfg.model.encoder.family = Family::kCompactCnn;
  cfg.model.encoder.size = Size::kSmall;
  cfg.model.patch_w = cfg.model.patch_h = patch;
  cfg.lr = 3e-3f;
  cfg.max_epochs = 3;
  cfg.horizon = 10;
  cfg.batch_size = 4;
  cfg.seed = 1;
  cfg.checkpoint_path = ckpt.string();
  return cfg;
}

}  // namespace

TEST_CASE("published default learning rates per family") {
  models::ModelConfig m;
  m.encoder.family = Family::kHierTransformer;
  TrainConfig c;
  c.model = m;
  CHECK(harness::default_lr(c.model) == doctest::Approx(1e-3));
  c.model.encoder.family = Family::kResidualCnn;
  CHECK(harness::default_lr(c.model) == doctest::Approx(1e-2));
  c.model.encoder.family = Family::kCompactCnn;
  CHECK(harness::default_lr(c.model) == doctest::Approx(1e-4));
}

TEST_CASE("training reduces the loss and keeps a best checkpoint") {
  TempDir td("train");
  data::DatasetIndex idx = synth(td.path / "data", 10, 32, 21);
  auto refs = all_refs(idx);
  auto stats = data::compute_stats(idx, {refs.begin(), refs.begin() + 8});
  SampleSet train = harness::load_samples(idx, {refs.begin(), refs.begin() + 8}, stats);
  SampleSet val = harness::load_samples(idx, {refs.begin() + 8, refs.end()}, stats);

  TrainConfig cfg = tiny_config(td.path / "best.ckpt");
  cfg.max_epochs = 6;
  auto result = harness::train(cfg, train, val, stats);

  REQUIRE(result.epochs_run == 6);
  REQUIRE(result.epoch_losses.size() == 6);
  CHECK(result.epoch_losses.back() < result.epoch_losses.front());
  CHECK(result.best_val_iou > 0.0);
  CHECK(result.best_epoch >= 0);
  CHECK(fs::exists(result.checkpoint_path));

  // The stored checkpoint reproduces the recorded validation IoU.
  auto model = ckpt::load_checkpoint(result.checkpoint_path);
  auto report = harness::evaluate(*model, val);
  CHECK(report.iou == doctest::Approx(result.best_val_iou).epsilon(1e-9));
  // And it carries the training statistics for transfer use.
  auto stored = ckpt::read_checkpoint_stats(result.checkpoint_path);
  REQUIRE(stored.mean.size() == 12);
  for (int c = 0; c < 12; ++c)
    CHECK(stored.mean[static_cast<std::size_t>(c)] ==
          doctest::Approx(stats.mean[static_cast<std::size_t>(c)]));
}

TEST_CASE("training is deterministic under a fixed seed") {
  TempDir td("det");
  data::DatasetIndex idx = synth(td.path / "data", 8, 32, 22);
  auto refs = all_refs(idx);
  auto stats = data::compute_stats(idx, {refs.begin(), refs.begin() + 6});
  SampleSet train = harness::load_samples(idx, {refs.begin(), refs.begin() + 6}, stats);
  SampleSet val = harness::load_samples(idx, {refs.begin() + 6, refs.end()}, stats);

  TrainConfig cfg = tiny_config(td.path / "a.ckpt");
  auto r1 = harness::train(cfg, train, val, stats);
  cfg.checkpoint_path = (td.path / "b.ckpt").string();
  auto r2 = harness::train(cfg, train, val, stats);

  REQUIRE(r1.epoch_losses.size() == r2.epoch_losses.size());
  for (std::size_t i = 0; i < r1.epoch_losses.size(); ++i)
    CHECK(r1.epoch_losses[i] == r2.epoch_losses[i]);
  CHECK(r1.best_val_iou == r2.best_val_iou);
}

TEST_CASE("early stopping cuts the run short") {
  TempDir td("early");
  data::DatasetIndex idx = synth(td.path / "data", 10, 32, 23);
  auto refs = all_refs(idx);
  auto stats = data::compute_stats(idx, {refs.begin(), refs.begin() + 8});
  SampleSet train = harness::load_samples(idx, {refs.begin(), refs.begin() + 8}, stats);
  SampleSet val = harness::load_samples(idx, {refs.begin() + 8, refs.end()}, stats);

  TrainConfig cfg = tiny_config(td.path / "e.ckpt");
  cfg.max_epochs = 40;
  cfg.horizon = 40;
  cfg.early_stop_iou = 0.5f;
  auto result = harness::train(cfg, train, val, stats);
  CHECK(result.epochs_run < 40);
  CHECK(result.best_val_iou >= 0.5);
}

TEST_CASE("non-finite input raises DivergenceDetected") {
  TempDir td("diverge");
  data::DatasetIndex idx = synth(td.path / "data", 6, 32, 24);
  auto refs = all_refs(idx);
  auto stats = data::compute_stats(idx, refs);
  SampleSet train = harness::load_samples(idx, {refs.begin(), refs.begin() + 4}, stats);
  SampleSet val = harness::load_samples(idx, {refs.begin() + 4, refs.end()}, stats);
  train.images[0][0] = std::numeric_limits<float>::quiet_NaN();

  TrainConfig cfg = tiny_config(td.path / "d.ckpt");
  CHECK_THROWS_AS(harness::train(cfg, train, val, stats), DivergenceDetected);
}

TEST_CASE("checkpoint round trip preserves config, weights and predictions") {
  TempDir td("ckpt");
  nn::Rng rng(31);
  models::ModelConfig mc;
  mc.encoder.family = Family::kResidualCnn;
  mc.patch_w = mc.patch_h = 16;
  auto model = models::build_magnifier(mc, rng);
  const std::string path = (td.path / "m.ckpt").string();
  ckpt::save_checkpoint(*model, path);

  auto cfg = ckpt::read_checkpoint_config(path);
  CHECK(cfg.encoder.family == Family::kResidualCnn);
  CHECK(cfg.patch_w == 16);
  CHECK(cfg.magnifier);

  auto loaded = ckpt::load_checkpoint(path);
  auto a = model->named_parameters();
  auto b = loaded->named_parameters();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    REQUIRE(a[i].param.value().numel() == b[i].param.value().numel());
    for (std::int64_t j = 0; j < a[i].param.value().numel(); ++j)
      CHECK(a[i].param.value()[j] == b[i].param.value()[j]);
  }

  std::mt19937_64 drng(5);
  nn::Tensor img({12, 32, 32});
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  for (std::int64_t i = 0; i < img.numel(); ++i) img[i] = dist(drng);
  nn::Tensor m1 = model->predict_mask(img);
  nn::Tensor m2 = loaded->predict_mask(img);
  for (std::int64_t i = 0; i < m1.numel(); ++i) CHECK(m1[i] == m2[i]);

  // No stats were stored.
  CHECK(ckpt::read_checkpoint_stats(path).mean.empty());
  CHECK_THROWS_AS(ckpt::load_checkpoint((td.path / "nope.ckpt").string()),
                  MissingFile);
}

TEST_CASE("cross validation tests every sample once without leakage") {
  TempDir td("cv");
  data::DatasetIndex idx = synth(td.path / "data", 10, 32, 25);
  TrainConfig cfg = tiny_config(td.path / "unused.ckpt");
  cfg.max_epochs = 2;
  auto record = harness::cross_validate(cfg, idx, 5, data::FoldStrategy::kRandom,
                                        (td.path / "work").string());

  REQUIRE(record.rounds.size() == 5);
  std::set<std::string> tested;
  for (int k = 0; k < 5; ++k) {
    const auto& round = record.rounds[static_cast<std::size_t>(k)];
    CHECK(round.roles.test_fold == k);
    for (const auto* s : record.split.fold_samples(idx, round.roles.test_fold))
      tested.insert(s->id);

    // Stats must equal a recomputation over the train folds alone.
    std::vector<const data::SampleRef*> train_refs;
    for (int f : round.roles.train_folds)
      for (const auto* s : record.split.fold_samples(idx, f))
        train_refs.push_back(s);
    auto want = data::compute_stats(idx, train_refs);
    for (std::size_t c = 0; c < want.mean.size(); ++c) {
      CHECK(round.stats.mean[c] == doctest::Approx(want.mean[c]).epsilon(1e-12));
      CHECK(round.stats.std[c] == doctest::Approx(want.std[c]).epsilon(1e-12));
    }
    CHECK(fs::exists(round.checkpoint_path));
  }
  CHECK(tested.size() == idx.samples.size());
  REQUIRE(record.aggregate.folds.size() == 5);
  CHECK(record.wall_seconds > 0.0);

  const std::string rec_path = (td.path / "record.json").string();
  harness::save_record(record, rec_path);
  CHECK(fs::file_size(rec_path) > 0);
}

TEST_CASE("transfer evaluation degrades under distribution shift") {
  TempDir td("transfer");
  data::DatasetIndex idx = synth(td.path / "train", 12, 32, 26);
  auto refs = all_refs(idx);
  auto stats = data::compute_stats(idx, {refs.begin(), refs.begin() + 10});
  SampleSet train = harness::load_samples(idx, {refs.begin(), refs.begin() + 10}, stats);
  SampleSet val = harness::load_samples(idx, {refs.begin() + 10, refs.end()}, stats);

  TrainConfig cfg = tiny_config(td.path / "t.ckpt");
  cfg.max_epochs = 8;
  cfg.early_stop_iou = 0.85f;
  auto result = harness::train(cfg, train, val, stats);
  REQUIRE(result.best_val_iou > 0.5);

  data::DatasetIndex control = synth(td.path / "control", 6, 32, 27);
  data::DatasetIndex shifted = synth(td.path / "shifted", 6, 32, 27, 0.3);
  auto rc = harness::transfer_evaluate(result.checkpoint_path, control);
  auto rs = harness::transfer_evaluate(result.checkpoint_path, shifted);
  CHECK(rc.iou > rs.iou);

  // Channel mismatch is rejected.
  data::DatasetIndex l8 = synth(td.path / "l8", 4, 32, 28, 0.0, 8);
  CHECK_THROWS_AS(harness::transfer_evaluate(result.checkpoint_path, l8),
                  IncompatibleProfile);

  // fold_id selects a strict subset of the samples.
  auto sub = harness::transfer_evaluate(result.checkpoint_path, control, 0);
  auto whole_n = rc.counts.tp + rc.counts.fp + rc.counts.fn + rc.counts.tn;
  auto sub_n = sub.counts.tp + sub.counts.fp + sub.counts.fn + sub.counts.tn;
  CHECK(sub_n > 0);
  CHECK(sub_n < whole_n);
}

TEST_CASE("train config files parse and reject unknown keys") {
  TempDir td("cfgfile");
  const std::string good = (td.path / "good.cfg").string();
  std::ofstream(good) << "family = hierarchical-transformer\n"
                         "size = large\n"
                         "magnifier = false\n"
                         "patch = 32\n"
                         "lambda = 0.7\n"
                         "gamma = 0.2\n"
                         "lr = 0.005\n"
                         "epochs = 12\n"
                         "batch = 2\n"
                         "seed = 9\n"
                         "# trailing comment\n";
  TrainConfig cfg = harness::load_train_config(good);
  CHECK(cfg.model.encoder.family == Family::kHierTransformer);
  CHECK(cfg.model.encoder.size == Size::kLarge);
  CHECK(!cfg.model.magnifier);
  CHECK(cfg.model.patch_w == 32);
  CHECK(cfg.model.patch_h == 32);
  CHECK(cfg.loss.lambda == doctest::Approx(0.7));
  CHECK(cfg.loss.gamma == doctest::Approx(0.2));
  CHECK(cfg.lr == doctest::Approx(0.005));
  CHECK(cfg.max_epochs == 12);
  CHECK(cfg.batch_size == 2);
  CHECK(cfg.seed == 9);

  const std::string bad = (td.path / "bad.cfg").string();
  std::ofstream(bad) << "familly = compact-cnn\n";
  CHECK_THROWS_AS(harness::load_train_config(bad), Error);
  CHECK_THROWS_AS(harness::load_train_config((td.path / "nope.cfg").string()),
                  MissingFile);
}

TEST_CASE("cli entry point reports errors through exit codes") {
  const char* bad[] = {"magnifier", "no-such-command"};
  CHECK(harness::run_cli(2, bad) != 0);

  TempDir td("cli");
  std::string out = (td.path / "ds").string();
  const char* synth_cmd[] = {"magnifier", "synth-data", "--out", out.c_str(),
                             "--samples", "3", "--tile", "16"};
  CHECK(harness::run_cli(8, synth_cmd) == 0);
  CHECK(fs::exists(td.path / "ds" / "manifest.json"));
  auto idx = data::load_manifest((td.path / "ds" / "manifest.json").string());
  CHECK(idx.samples.size() == 3);
}
