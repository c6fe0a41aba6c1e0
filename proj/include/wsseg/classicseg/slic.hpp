#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "wsseg/image/raster.hpp"

namespace wsseg {

struct SlicOptions {
  double target_area = 3000.0;
  double compactness = 10.0;  // in L*a*b* units
  int max_iters = 10;
};

/// Partition of an image into 4-connected superpixels with ids 0..count-1.
struct SuperpixelMap {
  int height = 0;
  int width = 0;
  int count = 0;
  std::vector<int> ids;                          // row-major
  std::vector<std::array<double, 2>> centroids;  // (row, col)
  std::vector<int> sizes;
  std::vector<std::vector<int>> adjacency;  // sorted, 4-neighbourhood

  int at(int r, int c) const { return ids[static_cast<std::size_t>(r) * width + c]; }

  /// Renumbers ids densely in first-seen raster order and fills the statistics.
  static SuperpixelMap from_ids(int height, int width, std::vector<int> ids);
};

/// True when every id in 0..count-1 is used by one non-empty 4-connected region.
bool is_connected_partition(const SuperpixelMap& map);

/// Keeps the largest component of each id and merges the rest into the
/// largest adjacent region; components under `min_size` pixels are merged too.
SuperpixelMap enforce_connectivity(int height, int width, const std::vector<int>& ids, int min_size);

/// SLIC: k-means in (L*, a*, b*, x, y) seeded on a grid of step sqrt(target_area).
SuperpixelMap slic(const Image& image, const SlicOptions& opts = {});

/// Binary ".spm" file: magic "WSSP", u32 height, u32 width, u32 count, then
/// height*width u32 ids.
void write_superpixels(const std::filesystem::path& path, const SuperpixelMap& map);
SuperpixelMap read_superpixels(const std::filesystem::path& path);

}  // namespace wsseg
