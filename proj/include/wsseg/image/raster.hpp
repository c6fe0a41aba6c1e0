#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsseg/common/error.hpp"

namespace wsseg {

/// Interleaved H x W x channels raster.
template <typename T>
struct Raster {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<T> data;

  Raster() = default;
  Raster(int h, int w, int c, T fill = T{})
      : height(h), width(w), channels(c), data(static_cast<std::size_t>(h) * w * c, fill) {
    if (h < 0 || w < 0 || c < 1) throw ConfigError("invalid raster extent");
  }

  std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }
  T& at(int r, int c, int ch = 0) {
    return data[(static_cast<std::size_t>(r) * width + c) * channels + ch];
  }
  const T& at(int r, int c, int ch = 0) const {
    return data[(static_cast<std::size_t>(r) * width + c) * channels + ch];
  }
  bool operator==(const Raster&) const = default;
};

using Image = Raster<std::uint8_t>;      // 3 channels, RGB
using LabelMask = Raster<std::uint8_t>;  // 1 channel, labels 0..C-1 or kIgnoreLabel

inline constexpr std::uint8_t kIgnoreLabel = 255;

/// Mean over f x f blocks; trailing rows/columns that do not fill a block are dropped.
Image downscale_box(const Image& image, int factor);

}  // namespace wsseg
