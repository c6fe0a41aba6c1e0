#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wsseg/image/raster.hpp"

namespace wsseg {

inline constexpr int kPatchSize = 256;
inline constexpr int kPatchStride = 200;  // 56-pixel overlap
inline constexpr int kContextBorder = 64;

/// One grid cell. Pads count patch pixels past the ROI's bottom/right edge.
struct PatchRecord {
  int index = 0;
  int row0 = 0;
  int col0 = 0;
  int pad_bottom = 0;
  int pad_right = 0;
};

struct PatchGrid {
  int height = 0;
  int width = 0;
  int patch = kPatchSize;
  int stride = kPatchStride;
  std::vector<int> row_origins;
  std::vector<int> col_origins;
  std::vector<PatchRecord> records;  // row-major

  /// Origins 0, stride, 2*stride, ... up to ceil((n - patch) / stride) * stride;
  /// the last row/column is padded rather than dropped.
  static PatchGrid make(int height, int width, int patch = kPatchSize, int stride = kPatchStride);
};

/// Reflection index with the edge pixel repeated: ..., 1, 0 | 0, 1, ..., n-1 | n-1, n-2, ...
int symmetric_index(int i, int n);

/// h x w window at (row0, col0), symmetric-padded wherever it leaves the raster.
template <typename T>
Raster<T> extract_window(const Raster<T>& src, int row0, int col0, int h, int w);

/// Inner patch of a grid cell.
template <typename T>
Raster<T> extract_patch(const Raster<T>& src, const PatchGrid& grid, int index) {
  const auto& r = grid.records.at(index);
  return extract_window(src, r.row0, r.col0, grid.patch, grid.patch);
}

/// Patch plus a `border` frame on every side, centered on the inner patch.
template <typename T>
Raster<T> make_context(const Raster<T>& src, const PatchGrid& grid, int index,
                       int border = kContextBorder) {
  const auto& r = grid.records.at(index);
  return extract_window(src, r.row0 - border, r.col0 - border, grid.patch + 2 * border,
                        grid.patch + 2 * border);
}

/// Center crop of a raster (used to check context/inner congruence).
template <typename T>
Raster<T> center_crop(const Raster<T>& src, int h, int w);

/// Averages overlapping per-patch class scores and takes the per-pixel argmax
/// (ties go to the smaller label). Padding areas are discarded.
class Stitcher {
 public:
  Stitcher(const PatchGrid& grid, int num_classes);

  /// `scores` is C x patch x patch, channel-major.
  void add(int index, const float* scores);
  LabelMask finish() const;
  /// Averaged scores, H x W x C.
  Raster<float> mean_scores() const;
  /// Number of patches covering each pixel.
  Raster<int> coverage() const;

 private:
  void check_complete() const;

  PatchGrid grid_;
  int classes_;
  std::vector<double> sums_;  // H x W x C
  std::vector<int> counts_;   // H x W
  std::vector<bool> seen_;
};

/// Tab-separated: index, row0, col0, pad spec "top,bottom,left,right".
void write_manifest(const std::filesystem::path& path, const PatchGrid& grid);
std::string manifest_text(const PatchGrid& grid);

}  // namespace wsseg
