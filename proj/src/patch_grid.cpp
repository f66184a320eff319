#include "magnifier/patch_grid.hpp"

#include <string>

namespace magnifier::grid {

GridSpec validate_grid(int image_w, int image_h, int patch_w, int patch_h) {
  if (image_w <= 0 || image_h <= 0 || patch_w <= 0 || patch_h <= 0)
    throw NonDivisibleGrid("all dimensions must be positive");
  if (image_w % patch_w != 0 || image_h % patch_h != 0)
    throw NonDivisibleGrid(std::to_string(patch_w) + "x" +
                           std::to_string(patch_h) + " does not tile " +
                           std::to_string(image_w) + "x" +
                           std::to_string(image_h));
  GridSpec spec;
  spec.image_w = image_w;
  spec.image_h = image_h;
  spec.patch_w = patch_w;
  spec.patch_h = patch_h;
  spec.n_cols = image_w / patch_w;
  spec.n_rows = image_h / patch_h;
  return spec;
}

std::vector<PositionedPatch> crop_into_patches(const nn::Tensor& image,
                                               const GridSpec& spec) {
  if (image.rank() != 3 || image.dim(1) != spec.image_h ||
      image.dim(2) != spec.image_w)
    throw ShapeMismatch("crop_into_patches: image does not match grid spec");
  const int channels = image.dim(0);
  std::vector<PositionedPatch> patches;
  patches.reserve(static_cast<std::size_t>(spec.n_rows) * spec.n_cols);
  for (int r = 0; r < spec.n_rows; ++r)
    for (int c = 0; c < spec.n_cols; ++c) {
      PositionedPatch p;
      p.row = r;
      p.col = c;
      p.data = nn::Tensor({channels, spec.patch_h, spec.patch_w});
      for (int ch = 0; ch < channels; ++ch)
        for (int y = 0; y < spec.patch_h; ++y)
          for (int x = 0; x < spec.patch_w; ++x)
            p.data.at(ch, y, x) =
                image.at(ch, r * spec.patch_h + y, c * spec.patch_w + x);
      patches.push_back(std::move(p));
    }
  return patches;
}

EmbeddingGrid recompose_grid(const std::vector<PositionedPatch>& embeddings,
                             const GridSpec& spec) {
  const std::size_t expected =
      static_cast<std::size_t>(spec.n_rows) * spec.n_cols;
  if (embeddings.size() != expected)
    throw MissingPatch("expected " + std::to_string(expected) +
                       " embeddings, got " + std::to_string(embeddings.size()));
  const nn::Tensor& first = embeddings.front().data;
  if (first.rank() != 3)
    throw ShapeMismatch("recompose_grid: embeddings must be rank-3");
  const int c0 = first.dim(0), h0 = first.dim(1), w0 = first.dim(2);

  std::vector<bool> seen(expected, false);
  EmbeddingGrid out;
  out.data = nn::Tensor({c0, spec.n_rows * h0, spec.n_cols * w0});
  for (const PositionedPatch& p : embeddings) {
    if (!p.data.same_shape(first))
      throw ShapeMismatch("recompose_grid: embedding shapes differ");
    if (p.row < 0 || p.row >= spec.n_rows || p.col < 0 || p.col >= spec.n_cols)
      throw MissingPatch("position (" + std::to_string(p.row) + "," +
                         std::to_string(p.col) + ") outside grid");
    std::size_t slot = static_cast<std::size_t>(p.row) * spec.n_cols + p.col;
    if (seen[slot])
      throw DuplicatePosition("(" + std::to_string(p.row) + "," +
                              std::to_string(p.col) + ")");
    seen[slot] = true;
    for (int ch = 0; ch < c0; ++ch)
      for (int y = 0; y < h0; ++y)
        for (int x = 0; x < w0; ++x)
          out.data.at(ch, p.row * h0 + y, p.col * w0 + x) = p.data.at(ch, y, x);
  }
  return out;
}

}  // namespace magnifier::grid
