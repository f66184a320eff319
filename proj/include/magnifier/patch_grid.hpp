#pragma once

#include <vector>

#include "magnifier/tensor.hpp"

namespace magnifier::grid {

/// Non-overlapping exact tiling of an image_w x image_h image by
/// patch_w x patch_h patches.
struct GridSpec {
  int image_w = 0;
  int image_h = 0;
  int patch_w = 0;
  int patch_h = 0;
  int n_cols = 0;  // image_w / patch_w
  int n_rows = 0;  // image_h / patch_h
};

/// A CHW crop plus its (row, col) grid coordinates. Row is the vertical
/// index, col the horizontal one; (0,0) is the top-left patch.
struct PositionedPatch {
  nn::Tensor data;
  int row = 0;
  int col = 0;
};

struct EmbeddingGrid {
  nn::Tensor data;  // (C0, n_rows*h0, n_cols*w0)
};

/// Throws NonDivisibleGrid unless the patch size tiles the image exactly.
GridSpec validate_grid(int image_w, int image_h, int patch_w, int patch_h);

/// Splits a CHW image into n_rows*n_cols positioned patches in row-major
/// order. Every pixel lands in exactly one patch.
std::vector<PositionedPatch> crop_into_patches(const nn::Tensor& image,
                                               const GridSpec& spec);

/// Reassembles per-patch embeddings into one grid-ordered feature map.
/// Placement is governed by each patch's (row, col), not list order.
EmbeddingGrid recompose_grid(const std::vector<PositionedPatch>& embeddings,
                             const GridSpec& spec);

}  // namespace magnifier::grid
