#include "magnifier/models.hpp"

#include <cmath>
#include <utility>

#include "magnifier/autodiff.hpp"

namespace magnifier::models {

using nn::Conv2d;
using nn::GroupNorm;
using nn::LayerNorm;
using nn::Linear;
using nn::Module;
using nn::NamedParam;
using nn::Rng;
using nn::Var;

const char* family_name(Family f) {
  switch (f) {
    case Family::kCompactCnn: return "compact-cnn";
    case Family::kResidualCnn: return "residual-cnn";
    case Family::kHierTransformer: return "hierarchical-transformer";
  }
  return "?";
}

Family family_from_name(const std::string& name) {
  if (name == "compact-cnn") return Family::kCompactCnn;
  if (name == "residual-cnn") return Family::kResidualCnn;
  if (name == "hierarchical-transformer") return Family::kHierTransformer;
  throw Error("unknown encoder family: " + name);
}

const char* size_name(Size s) {
  return s == Size::kSmall ? "small" : "large";
}

Size size_from_name(const std::string& name) {
  if (name == "small") return Size::kSmall;
  if (name == "large") return Size::kLarge;
  throw Error("unknown encoder size: " + name);
}

namespace {

enum class Act { kRelu, kHardswish, kNone };

Var activate(const Var& x, Act a) {
  switch (a) {
    case Act::kRelu: return nn::relu(x);
    case Act::kHardswish: return nn::hardswish(x);
    case Act::kNone: return x;
  }
  return x;
}

// conv -> group norm -> activation
struct ConvUnit : Module {
  Conv2d conv;
  GroupNorm gn;
  Act act;

  ConvUnit(int in, int out, int k, int s, int pad, int groups, Act a, Rng& rng)
      : conv(in, out, k, s, pad, groups, false, rng), gn(8, out), act(a) {}

  Var forward(const Var& x) const { return activate(gn.forward(conv.forward(x)), act); }

  void collect_params(const std::string& p, std::vector<NamedParam>& out) const override {
    conv.collect_params(p + "conv.", out);
    gn.collect_params(p + "gn.", out);
  }

  std::vector<int> out_shape(const std::vector<int>& in) const {
    return conv.out_shape(in);
  }
  void describe(std::vector<int>& shape, flops::Plan& plan) const {
    plan.push_back(conv.describe(shape));
    shape = conv.out_shape(shape);
  }
};

// depthwise 3x3 + pointwise 1x1, hard-swish throughout
struct DsBlock : Module {
  ConvUnit dw;
  ConvUnit pw;

  DsBlock(int in, int out, int stride, Rng& rng)
      : dw(in, in, 3, stride, 1, in, Act::kHardswish, rng),
        pw(in, out, 1, 1, 0, 1, Act::kHardswish, rng) {}

  Var forward(const Var& x) const { return pw.forward(dw.forward(x)); }

  void collect_params(const std::string& p, std::vector<NamedParam>& out) const override {
    dw.collect_params(p + "dw.", out);
    pw.collect_params(p + "pw.", out);
  }
  void describe(std::vector<int>& shape, flops::Plan& plan) const {
    dw.describe(shape, plan);
    pw.describe(shape, plan);
  }
};

struct ResBlock : Module {
  ConvUnit u1;
  Conv2d conv2;
  GroupNorm gn2;

  ResBlock(int ch, Rng& rng)
      : u1(ch, ch, 3, 1, 1, 1, Act::kRelu, rng),
        conv2(ch, ch, 3, 1, 1, 1, false, rng),
        gn2(8, ch) {}

  Var forward(const Var& x) const {
    Var y = u1.forward(x);
    y = gn2.forward(conv2.forward(y));
    return nn::relu(nn::add(x, y));
  }

  void collect_params(const std::string& p, std::vector<NamedParam>& out) const override {
    u1.collect_params(p + "u1.", out);
    conv2.collect_params(p + "conv2.", out);
    gn2.collect_params(p + "gn2.", out);
  }
  void describe(std::vector<int>& shape, flops::Plan& plan) const {
    u1.describe(shape, plan);
    plan.push_back(conv2.describe(shape));
  }
};

struct Mhsa : Module {
  int dim, heads;
  Linear q, k, v, o;

  Mhsa(int dim, int heads, Rng& rng)
      : dim(dim), heads(heads), q(dim, dim, rng), k(dim, dim, rng),
        v(dim, dim, rng), o(dim, dim, rng) {}

  // tokens: (B, N, d)
  Var forward(const Var& x) const {
    int B = x.value().dim(0), N = x.value().dim(1);
    int dh = dim / heads;
    auto split = [&](const Var& t) {
      // (B,N,d) -> (B*heads, N, dh)
      Var r = nn::reshape(t, {B, N, heads, dh});
      r = nn::permute(r, {0, 2, 1, 3});
      return nn::reshape(r, {B * heads, N, dh});
    };
    Var qs = split(q.forward(x));
    Var ks = split(k.forward(x));
    Var vs = split(v.forward(x));
    Var att = nn::bmm(qs, nn::permute(ks, {0, 2, 1}));
    att = nn::softmax_lastdim(nn::scale(att, 1.0f / std::sqrt(static_cast<float>(dh))));
    Var out = nn::bmm(att, vs);  // (B*heads, N, dh)
    out = nn::reshape(out, {B, heads, N, dh});
    out = nn::permute(out, {0, 2, 1, 3});
    out = nn::reshape(out, {B, N, dim});
    return o.forward(out);
  }

  void collect_params(const std::string& p, std::vector<NamedParam>& out) const override {
    q.collect_params(p + "q.", out);
    k.collect_params(p + "k.", out);
    v.collect_params(p + "v.", out);
    o.collect_params(p + "o.", out);
  }
  void describe(std::uint64_t n_tokens, flops::Plan& plan) const {
    plan.push_back(q.describe(n_tokens));
    plan.push_back(k.describe(n_tokens));
    plan.push_back(v.describe(n_tokens));
    // q k^T and att v, summed over heads: N^2 * d each.
    std::uint64_t att = n_tokens * n_tokens * static_cast<std::uint64_t>(dim);
    plan.push_back({flops::LayerDesc::Kind::kMatmul, "attention", 2 * att});
    plan.push_back(o.describe(n_tokens));
  }
};

struct TransBlock : Module {
  LayerNorm ln1, ln2;
  Mhsa attn;
  Linear fc1, fc2;

  TransBlock(int dim, int heads, Rng& rng)
      : ln1(dim), ln2(dim), attn(dim, heads, rng),
        fc1(dim, 2 * dim, rng), fc2(2 * dim, dim, rng) {}

  Var forward(const Var& x) const {
    Var y = nn::add(x, attn.forward(ln1.forward(x)));
    Var m = fc2.forward(nn::gelu(fc1.forward(ln2.forward(y))));
    return nn::add(y, m);
  }

  void collect_params(const std::string& p, std::vector<NamedParam>& out) const override {
    ln1.collect_params(p + "ln1.", out);
    attn.collect_params(p + "attn.", out);
    ln2.collect_params(p + "ln2.", out);
    fc1.collect_params(p + "fc1.", out);
    fc2.collect_params(p + "fc2.", out);
  }
  void describe(std::uint64_t n_tokens, flops::Plan& plan) const {
    attn.describe(n_tokens, plan);
    plan.push_back(fc1.describe(n_tokens));
    plan.push_back(fc2.describe(n_tokens));
  }
};

// ---------------------------------------------------------------------------
// encoders
// ---------------------------------------------------------------------------

struct CompactCnn : Encoder {
  ConvUnit stem;
  std::vector<std::unique_ptr<DsBlock>> stage1, stage2;
  std::vector<int> channels_, strides_;
  int in_channels;

  CompactCnn(int in, Size size, Rng& rng)
      : stem(in, size == Size::kSmall ? 16 : 32, 3, 2, 1, 1, Act::kHardswish, rng),
        in_channels(in) {
    auto push = [&](std::vector<std::unique_ptr<DsBlock>>& v, int i, int o, int s) {
      v.push_back(std::make_unique<DsBlock>(i, o, s, rng));
    };
    if (size == Size::kSmall) {
      push(stage1, 16, 24, 1);
      push(stage2, 24, 32, 2);
      push(stage2, 32, 32, 1);
      channels_ = {24, 32};
    } else {
      push(stage1, 32, 48, 1);
      push(stage1, 48, 48, 1);
      push(stage2, 48, 64, 2);
      push(stage2, 64, 64, 1);
      push(stage2, 64, 64, 1);
      channels_ = {48, 64};
    }
    strides_ = {2, 4};
  }

  std::vector<Var> forward_levels(const Var& x) const override {
    Var y = stem.forward(x);
    for (const auto& b : stage1) y = b->forward(y);
    Var l1 = y;
    for (const auto& b : stage2) y = b->forward(y);
    return {l1, y};
  }
  std::vector<int> level_channels() const override { return channels_; }
  std::vector<int> level_strides() const override { return strides_; }

  flops::Plan plan(int h, int w) const override {
    flops::Plan p;
    std::vector<int> shape{1, in_channels, h, w};
    stem.describe(shape, p);
    for (const auto& b : stage1) b->describe(shape, p);
    for (const auto& b : stage2) b->describe(shape, p);
    return p;
  }

  void collect_params(const std::string& p, std::vector<NamedParam>& out) const override {
    stem.collect_params(p + "stem.", out);
    for (std::size_t i = 0; i < stage1.size(); ++i)
      stage1[i]->collect_params(p + "s1." + std::to_string(i) + ".", out);
    for (std::size_t i = 0; i < stage2.size(); ++i)
      stage2[i]->collect_params(p + "s2." + std::to_string(i) + ".", out);
  }
};

struct ResidualCnn : Encoder {
  ConvUnit stem;
  std::vector<std::unique_ptr<ResBlock>> stage1, stage2;
  std::unique_ptr<ConvUnit> down;
  std::vector<int> channels_, strides_;
  int in_channels;

  ResidualCnn(int in, Size size, Rng& rng)
      : stem(in, size == Size::kSmall ? 16 : 24, 3, 2, 1, 1, Act::kRelu, rng),
        in_channels(in) {
    int c0 = size == Size::kSmall ? 16 : 24;
    int c1 = size == Size::kSmall ? 32 : 48;
    int reps = size == Size::kSmall ? 1 : 2;
    for (int i = 0; i < reps; ++i)
      stage1.push_back(std::make_unique<ResBlock>(c0, rng));
    down = std::make_unique<ConvUnit>(c0, c1, 3, 2, 1, 1, Act::kRelu, rng);
    for (int i = 0; i < reps; ++i)
      stage2.push_back(std::make_unique<ResBlock>(c1, rng));
    channels_ = {c0, c1};
    strides_ = {2, 4};
  }

  std::vector<Var> forward_levels(const Var& x) const override {
    Var y = stem.forward(x);
    for (const auto& b : stage1) y = b->forward(y);
    Var l1 = y;
    y = down->forward(y);
    for (const auto& b : stage2) y = b->forward(y);
    return {l1, y};
  }
  std::vector<int> level_channels() const override { return channels_; }
  std::vector<int> level_strides() const override { return strides_; }

  flops::Plan plan(int h, int w) const override {
    flops::Plan p;
    std::vector<int> shape{1, in_channels, h, w};
    stem.describe(shape, p);
    for (const auto& b : stage1) b->describe(shape, p);
    down->describe(shape, p);
    for (const auto& b : stage2) b->describe(shape, p);
    return p;
  }

  void collect_params(const std::string& p, std::vector<NamedParam>& out) const override {
    stem.collect_params(p + "stem.", out);
    for (std::size_t i = 0; i < stage1.size(); ++i)
      stage1[i]->collect_params(p + "s1." + std::to_string(i) + ".", out);
    down->collect_params(p + "down.", out);
    for (std::size_t i = 0; i < stage2.size(); ++i)
      stage2[i]->collect_params(p + "s2." + std::to_string(i) + ".", out);
  }
};

struct HierTransformer : Encoder {
  Conv2d embed1;
  Conv2d embed2;
  std::vector<std::unique_ptr<TransBlock>> stage1, stage2;
  std::vector<int> channels_, strides_;
  int in_channels;

  HierTransformer(int in, Size size, Rng& rng)
      : embed1(in, size == Size::kSmall ? 24 : 32, 4, 4, 0, 1, true, rng),
        embed2(size == Size::kSmall ? 24 : 32, size == Size::kSmall ? 32 : 48,
               2, 2, 0, 1, true, rng),
        in_channels(in) {
    int d1 = size == Size::kSmall ? 24 : 32;
    int d2 = size == Size::kSmall ? 32 : 48;
    int reps = size == Size::kSmall ? 1 : 2;
    for (int i = 0; i < reps; ++i)
      stage1.push_back(std::make_unique<TransBlock>(d1, 4, rng));
    for (int i = 0; i < reps; ++i)
      stage2.push_back(std::make_unique<TransBlock>(d2, 4, rng));
    channels_ = {d1, d2};
    strides_ = {4, 8};
  }

  static Var to_tokens(const Var& fmap) {
    int B = fmap.value().dim(0), C = fmap.value().dim(1);
    int H = fmap.value().dim(2), W = fmap.value().dim(3);
    return nn::permute(nn::reshape(fmap, {B, C, H * W}), {0, 2, 1});
  }
  static Var to_fmap(const Var& tokens, int h, int w) {
    int B = tokens.value().dim(0), C = tokens.value().dim(2);
    return nn::reshape(nn::permute(tokens, {0, 2, 1}), {B, C, h, w});
  }

  std::vector<Var> forward_levels(const Var& x) const override {
    Var f1 = embed1.forward(x);
    int h1 = f1.value().dim(2), w1 = f1.value().dim(3);
    Var t = to_tokens(f1);
    for (const auto& b : stage1) t = b->forward(t);
    Var l1 = to_fmap(t, h1, w1);

    Var f2 = embed2.forward(l1);
    int h2 = f2.value().dim(2), w2 = f2.value().dim(3);
    t = to_tokens(f2);
    for (const auto& b : stage2) t = b->forward(t);
    return {l1, to_fmap(t, h2, w2)};
  }
  std::vector<int> level_channels() const override { return channels_; }
  std::vector<int> level_strides() const override { return strides_; }

  flops::Plan plan(int h, int w) const override {
    flops::Plan p;
    std::vector<int> shape{1, in_channels, h, w};
    p.push_back(embed1.describe(shape));
    shape = embed1.out_shape(shape);
    std::uint64_t n1 = static_cast<std::uint64_t>(shape[2]) * shape[3];
    for (const auto& b : stage1) b->describe(n1, p);
    p.push_back(embed2.describe(shape));
    shape = embed2.out_shape(shape);
    std::uint64_t n2 = static_cast<std::uint64_t>(shape[2]) * shape[3];
    for (const auto& b : stage2) b->describe(n2, p);
    return p;
  }

  void collect_params(const std::string& p, std::vector<NamedParam>& out) const override {
    embed1.collect_params(p + "embed1.", out);
    for (std::size_t i = 0; i < stage1.size(); ++i)
      stage1[i]->collect_params(p + "s1." + std::to_string(i) + ".", out);
    embed2.collect_params(p + "embed2.", out);
    for (std::size_t i = 0; i < stage2.size(); ++i)
      stage2[i]->collect_params(p + "s2." + std::to_string(i) + ".", out);
  }
};

// ---------------------------------------------------------------------------
// decoders
// ---------------------------------------------------------------------------

// U-Net style: refine coarse, merge with fine, then a full-resolution block
// that also sees the raw input as a skip.
struct ConvDecoder : Decoder {
  ConvUnit a, b, refine;
  Conv2d head;
  std::vector<int> channels_, strides_;
  int in_channels;

  ConvDecoder(const std::vector<int>& ch, const std::vector<int>& st, int in,
              int num_classes, Rng& rng)
      : a(ch[1], 32, 3, 1, 1, 1, Act::kRelu, rng),
        b(32 + ch[0], 16, 3, 1, 1, 1, Act::kRelu, rng),
        refine(16 + in, 16, 3, 1, 1, 1, Act::kRelu, rng),
        head(16, num_classes, 1, 1, 0, 1, true, rng),
        channels_(ch), strides_(st), in_channels(in) {}

  Var forward(const std::vector<Var>& levels, const Var& input) const override {
    Var y = a.forward(levels[1]);
    y = nn::upsample_nearest(y, strides_[1] / strides_[0]);
    y = b.forward(nn::concat_channels(y, levels[0]));
    y = nn::upsample_nearest(y, strides_[0]);
    y = refine.forward(nn::concat_channels(y, input));
    return head.forward(y);
  }

  flops::Plan plan(int h, int w) const override {
    flops::Plan p;
    std::vector<int> s2{1, channels_[1], h / strides_[1], w / strides_[1]};
    a.describe(s2, p);
    std::vector<int> s1{1, 32 + channels_[0], h / strides_[0], w / strides_[0]};
    b.describe(s1, p);
    std::vector<int> s0{1, 16 + in_channels, h, w};
    refine.describe(s0, p);
    p.push_back(head.describe(s0));
    return p;
  }

  void collect_params(const std::string& p, std::vector<NamedParam>& out) const override {
    a.collect_params(p + "a.", out);
    b.collect_params(p + "b.", out);
    refine.collect_params(p + "refine.", out);
    head.collect_params(p + "head.", out);
  }
};

// SegFormer-style all-MLP fuse: 1x1 projections to a common width, merge at
// the finest transformer stride, predict, upsample to full resolution.
struct MlpDecoder : Decoder {
  Conv2d p1, p2;
  ConvUnit fuse;
  Conv2d head;
  std::vector<int> channels_, strides_;

  MlpDecoder(const std::vector<int>& ch, const std::vector<int>& st,
             int num_classes, Rng& rng)
      : p1(ch[0], 32, 1, 1, 0, 1, true, rng),
        p2(ch[1], 32, 1, 1, 0, 1, true, rng),
        fuse(64, 32, 1, 1, 0, 1, Act::kRelu, rng),
        head(32, num_classes, 1, 1, 0, 1, true, rng),
        channels_(ch), strides_(st) {}

  Var forward(const std::vector<Var>& levels, const Var&) const override {
    Var u = nn::upsample_nearest(p2.forward(levels[1]), strides_[1] / strides_[0]);
    Var y = fuse.forward(nn::concat_channels(p1.forward(levels[0]), u));
    return nn::upsample_nearest(head.forward(y), strides_[0]);
  }

  flops::Plan plan(int h, int w) const override {
    flops::Plan p;
    std::vector<int> s1{1, channels_[0], h / strides_[0], w / strides_[0]};
    std::vector<int> s2{1, channels_[1], h / strides_[1], w / strides_[1]};
    p.push_back(p1.describe(s1));
    p.push_back(p2.describe(s2));
    std::vector<int> sf{1, 64, h / strides_[0], w / strides_[0]};
    fuse.describe(sf, p);
    p.push_back(head.describe(sf));
    return p;
  }

  void collect_params(const std::string& p, std::vector<NamedParam>& out) const override {
    p1.collect_params(p + "p1.", out);
    p2.collect_params(p + "p2.", out);
    fuse.collect_params(p + "fuse.", out);
    head.collect_params(p + "head.", out);
  }
};

}  // namespace

EncoderFactory default_encoder_factory() {
  return [](const EncoderSpec& spec, Rng& rng) -> std::unique_ptr<Encoder> {
    switch (spec.family) {
      case Family::kCompactCnn:
        return std::make_unique<CompactCnn>(spec.in_channels, spec.size, rng);
      case Family::kResidualCnn:
        return std::make_unique<ResidualCnn>(spec.in_channels, spec.size, rng);
      case Family::kHierTransformer:
        return std::make_unique<HierTransformer>(spec.in_channels, spec.size, rng);
    }
    throw Error("unknown encoder family");
  };
}

DecoderFactory default_decoder_factory() {
  return [](Family family, const std::vector<int>& ch,
            const std::vector<int>& st, int in_channels, int num_classes,
            Rng& rng) -> std::unique_ptr<Decoder> {
    if (family == Family::kHierTransformer)
      return std::make_unique<MlpDecoder>(ch, st, num_classes, rng);
    return std::make_unique<ConvDecoder>(ch, st, in_channels, num_classes, rng);
  };
}

MagnifierModel::MagnifierModel(ModelConfig config,
                               std::unique_ptr<Encoder> global_encoder,
                               std::unique_ptr<Encoder> patch_encoder,
                               std::unique_ptr<Decoder> decoder)
    : config_(std::move(config)),
      global_(std::move(global_encoder)),
      patch_(std::move(patch_encoder)),
      decoder_(std::move(decoder)) {}

Var MagnifierModel::forward(const Var& batch) const {
  const nn::Tensor& x = batch.value();
  if (x.rank() != 4 || x.dim(1) != config_.encoder.in_channels)
    throw ShapeMismatch("forward: expected NCHW batch matching in_channels");
  const int B = x.dim(0), H = x.dim(2), W = x.dim(3);

  std::vector<Var> levels = global_->forward_levels(batch);
  if (patch_) {
    grid::GridSpec spec =
        grid::validate_grid(W, H, config_.patch_w, config_.patch_h);
    Var folded = nn::space_to_patches(batch, config_.patch_h, config_.patch_w);
    std::vector<Var> plevels = patch_->forward_levels(folded);
    if (plevels.size() != levels.size())
      throw IncompatibleShapes("forward: branch pyramid depth differs");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      Var rec = nn::patches_to_space(plevels[i], B, spec.n_rows, spec.n_cols);
      if (!rec.value().same_shape(levels[i].value()))
        throw IncompatibleShapes("forward: branch embeddings differ in shape");
      levels[i] = nn::concat_channels(levels[i], rec);
    }
  }
  return decoder_->forward(levels, batch);
}

nn::Tensor MagnifierModel::predict_mask(const nn::Tensor& image) const {
  if (image.rank() != 3)
    throw ShapeMismatch("predict_mask: expected CHW image");
  nn::Tensor batched = nn::Tensor({1, image.dim(0), image.dim(1), image.dim(2)});
  std::copy_n(image.data(), image.numel(), batched.data());
  Var logits = forward(Var(batched));
  const nn::Tensor& lv = logits.value();
  const int K = lv.dim(1), H = lv.dim(2), W = lv.dim(3);
  nn::Tensor mask({H, W});
  for (int h = 0; h < H; ++h)
    for (int w = 0; w < W; ++w) {
      int best = 0;
      for (int c = 1; c < K; ++c)
        if (lv.at(0, c, h, w) > lv.at(0, best, h, w)) best = c;
      mask.at(h, w) = static_cast<float>(best);
    }
  return mask;
}

ParamBreakdown MagnifierModel::parameter_breakdown() const {
  ParamBreakdown b;
  b.global_encoder = global_->parameter_count();
  b.patch_encoder = patch_ ? patch_->parameter_count() : 0;
  b.decoder = decoder_->parameter_count();
  b.total = b.global_encoder + b.patch_encoder + b.decoder;
  return b;
}

flops::Plan MagnifierModel::layer_plan(int h, int w) const {
  flops::Plan plan = global_->plan(h, w);
  if (patch_) {
    grid::GridSpec spec =
        grid::validate_grid(w, h, config_.patch_w, config_.patch_h);
    std::uint64_t n_patches =
        static_cast<std::uint64_t>(spec.n_rows) * spec.n_cols;
    for (auto d : patch_->plan(config_.patch_h, config_.patch_w)) {
      d.macs *= n_patches;
      d.label = "patch." + d.label;
      plan.push_back(d);
    }
  }
  for (const auto& d : decoder_->plan(h, w)) plan.push_back(d);
  return plan;
}

void MagnifierModel::collect_params(const std::string& prefix,
                                    std::vector<NamedParam>& out) const {
  global_->collect_params(prefix + "global.", out);
  if (patch_) patch_->collect_params(prefix + "patch.", out);
  decoder_->collect_params(prefix + "decoder.", out);
}

std::unique_ptr<MagnifierModel> build_magnifier(
    const ModelConfig& config, Rng& rng, const EncoderFactory& encoder_factory,
    const DecoderFactory& decoder_factory) {
  auto global_enc = encoder_factory(config.encoder, rng);
  std::unique_ptr<Encoder> patch_enc;
  if (config.magnifier) {
    patch_enc = encoder_factory(config.encoder, rng);
    if (global_enc->level_channels() != patch_enc->level_channels() ||
        global_enc->level_strides() != patch_enc->level_strides())
      throw IncompatibleShapes("build_magnifier: branch pyramids incompatible");
  }
  std::vector<int> fused = global_enc->level_channels();
  if (config.magnifier)
    for (int& c : fused) c *= 2;
  auto decoder =
      decoder_factory(config.encoder.family, fused, global_enc->level_strides(),
                      config.encoder.in_channels, config.num_classes, rng);
  return std::make_unique<MagnifierModel>(config, std::move(global_enc),
                                          std::move(patch_enc),
                                          std::move(decoder));
}

}  // namespace magnifier::models
