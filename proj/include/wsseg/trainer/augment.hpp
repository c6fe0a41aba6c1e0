#pragma once

#include <cstdint>

#include "wsseg/common/rng.hpp"
#include "wsseg/trainer/data.hpp"

namespace wsseg {

/// One geometric augmentation. Rotation is counter-clockwise in quarter turns
/// and is applied after the optional horizontal flip.
struct Transform {
  int quarter_turns = 0;
  bool hflip = false;
  bool crop = false;
  int crop_row = 0;  // top-left of the crop window inside the mask
  int crop_col = 0;

  bool is_identity() const { return quarter_turns == 0 && !hflip && !crop; }
};

struct AugmentOptions {
  int multiplicity = 5;  // augmented copies per sample, the first is the original
  int crop_size = 224;
  bool allow_crop = true;
};

/// Draws a random non-identity transform. Cropping is only offered for
/// samples whose image and mask share one size.
Transform random_transform(Rng& rng, int mask_size, bool same_size, const AugmentOptions& opts);

/// Applies `t` to a square sample. Image and mask are transformed about their
/// common centre, so a context image stays aligned with its inner mask. A crop
/// keeps `crop_size` pixels and restores the original size by symmetric
/// extension, centring the kept window.
Sample apply_transform(const Sample& s, const Transform& t, int crop_size = 224);

/// `multiplicity` transforms per sample, first one identity.
std::vector<Transform> plan_augmentation(const Sample& s, Rng& rng, const AugmentOptions& opts);

}  // namespace wsseg
