#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "wsseg/classicseg/color.hpp"
#include "wsseg/classicseg/slic.hpp"

namespace wsseg {

/// Radius-1 local binary pattern codes. Neighbours run clockwise from the
/// top-left; bit i is set when neighbour i >= centre. Borders mirror.
Raster<std::uint8_t> lbp_map(const RealRaster& channel);

inline constexpr int kLabBins = 32;
inline constexpr int kLbpBins = 256;
/// One region block: L*, a*, b* histograms then LBP-H and LBP-E histograms.
inline constexpr int kBlockDims = 3 * kLabBins + 2 * kLbpBins;
/// Superpixel block, inner ring block, outer ring block.
inline constexpr int kFeatureDims = 3 * kBlockDims;

/// Row-major (rows x dims) float matrix.
struct FeatureMatrix {
  int rows = 0;
  int dims = 0;
  std::vector<float> data;

  const float* row(int i) const { return data.data() + static_cast<std::size_t>(i) * dims; }
  float* row(int i) { return data.data() + static_cast<std::size_t>(i) * dims; }
};

struct FeatureOptions {
  double inner_radius = 2.0 * std::sqrt(3000.0 / std::numbers::pi);
  double outer_radius = 4.0 * std::sqrt(3000.0 / std::numbers::pi);
};

/// Histogram bin of a L*a*b* channel value (channel 0 spans [0,100], the
/// others [-128,127]), clamped to the edge bins.
int lab_bin(int channel, double value);

/// Per superpixel: [superpixel | ring (0, inner] minus the superpixel |
/// ring (inner, outer]] around the centroid. Every histogram is normalized to
/// sum 1, or left zero when its region is empty.
FeatureMatrix neighborhood_features(const RealRaster& lab, const StainImages& stains,
                                    const SuperpixelMap& map, const FeatureOptions& opts = {});

/// Convenience: Lab conversion, deconvolution and features for an image.
FeatureMatrix image_features(const Image& image, const SuperpixelMap& map,
                             const FeatureOptions& opts = {});

/// Text description of the block layout of a feature row.
std::string feature_layout_text();

/// Records of (u32 superpixel id, u32 dims, dims x f32), little endian;
/// the layout text goes to `path` + ".txt".
void write_feature_dump(const std::filesystem::path& path, const FeatureMatrix& features);
FeatureMatrix read_feature_dump(const std::filesystem::path& path);

}  // namespace wsseg
