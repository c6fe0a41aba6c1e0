#pragma once

#include <array>
#include <cstdint>

#include "wsseg/netgraph/model.hpp"
#include "wsseg/tiling/tiling.hpp"

namespace wsseg {

struct Segmentation {
  LabelMask labels;
  Raster<float> probabilities;  // H x W x C, averaged over overlapping patches
  PatchGrid grid;
};

/// Default patch stride: 200 for 256 patches, the same 7/32 overlap otherwise.
int default_stride(int patch);

/// Tiles `image` on the model's patch grid, feeds each inner patch (with its
/// context border for multi-resolution models) through the network in eval
/// mode, and stitches softmax scores back to the full ROI.
Segmentation segment_roi(Model<float>& model, const Image& image, int batch_size = 4, int stride = 0);

/// Fixed 8-colour legend, one RGB triple per tissue label.
const std::array<std::array<std::uint8_t, 3>, 8>& label_palette();

/// Half-and-half blend of the image with the palette colour of each label.
Image overlay(const Image& image, const LabelMask& labels);

/// Labels painted in palette colours.
Image colorize(const LabelMask& labels);

}  // namespace wsseg
