#include "wsseg/trainer/augment.hpp"

#include "wsseg/common/error.hpp"
#include "wsseg/tiling/tiling.hpp"

namespace wsseg {

namespace {

template <typename P>
Raster<P> flip_rotate(const Raster<P>& in, bool hflip, int turns) {
  const int n = in.height;
  Raster<P> out(n, n, in.channels);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      // Source pixel of output (r, c): undo the rotation, then the flip.
      int sr = r, sc = c;
      for (int k = 0; k < turns; ++k) {
        const int tr = sc, tc = n - 1 - sr;
        sr = tr;
        sc = tc;
      }
      if (hflip) sc = n - 1 - sc;
      for (int ch = 0; ch < in.channels; ++ch) out.at(r, c, ch) = in.at(sr, sc, ch);
    }
  return out;
}

// Crop a window and re-extend it symmetrically to the original size.
template <typename P>
Raster<P> crop_and_pad(const Raster<P>& in, int row, int col, int size) {
  const Raster<P> window = extract_window(in, row, col, size, size);
  const int lead = (in.height - size) / 2;
  return extract_window(window, -lead, -lead, in.height, in.width);
}

}  // namespace

Transform random_transform(Rng& rng, int mask_size, bool same_size, const AugmentOptions& opts) {
  const bool can_crop = opts.allow_crop && same_size && opts.crop_size < mask_size;
  // Quarter turns 0..3 times flip, plus crop variants; skip the identity.
  const int kinds = can_crop ? 16 : 8;
  const int k = 1 + static_cast<int>(rng.below(kinds - 1));
  Transform t;
  t.quarter_turns = k % 4;
  t.hflip = (k / 4) % 2 == 1;
  t.crop = k >= 8;
  if (t.crop) {
    t.crop_row = static_cast<int>(rng.below(mask_size - opts.crop_size + 1));
    t.crop_col = static_cast<int>(rng.below(mask_size - opts.crop_size + 1));
  }
  return t;
}

Sample apply_transform(const Sample& s, const Transform& t, int crop_size) {
  if (s.image.height != s.image.width || s.mask.height != s.mask.width) {
    throw DataError("augmentation needs square samples");
  }
  if ((s.image.height - s.mask.height) % 2 != 0) throw DataError("context border must be even");
  Sample out = s;
  if (t.crop) {
    if (s.image.height != s.mask.height) throw DataError("crop needs equal image and mask sizes");
    out.image = crop_and_pad(out.image, t.crop_row, t.crop_col, crop_size);
    out.mask = crop_and_pad(out.mask, t.crop_row, t.crop_col, crop_size);
  }
  if (t.hflip || t.quarter_turns) {
    out.image = flip_rotate(out.image, t.hflip, t.quarter_turns);
    out.mask = flip_rotate(out.mask, t.hflip, t.quarter_turns);
  }
  return out;
}

std::vector<Transform> plan_augmentation(const Sample& s, Rng& rng, const AugmentOptions& opts) {
  if (opts.multiplicity < 1) throw ConfigError("augmentation multiplicity must be >= 1");
  std::vector<Transform> plan{Transform{}};
  const bool same = s.image.height == s.mask.height;
  for (int i = 1; i < opts.multiplicity; ++i) plan.push_back(random_transform(rng, s.mask.height, same, opts));
  return plan;
}

}  // namespace wsseg
