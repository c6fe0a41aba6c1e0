#include "wsseg/classicseg/features.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>

#include "wsseg/tiling/tiling.hpp"

namespace wsseg {

Raster<std::uint8_t> lbp_map(const RealRaster& channel) {
  if (channel.channels != 1) throw DataError("LBP needs a single-channel raster");
  static constexpr int dr[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
  static constexpr int dc[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
  const int h = channel.height, w = channel.width;
  Raster<std::uint8_t> out(h, w, 1);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const double centre = channel.at(r, c);
      int code = 0;
      for (int i = 0; i < 8; ++i) {
        const int nr = symmetric_index(r + dr[i], h), nc = symmetric_index(c + dc[i], w);
        if (channel.at(nr, nc) >= centre) code |= 1 << i;
      }
      out.at(r, c) = static_cast<std::uint8_t>(code);
    }
  return out;
}

int lab_bin(int channel, double value) {
  const double lo = channel == 0 ? 0.0 : -128.0;
  const double hi = channel == 0 ? 100.0 : 127.0;
  const int b = static_cast<int>(std::floor((value - lo) / (hi - lo) * kLabBins));
  return std::clamp(b, 0, kLabBins - 1);
}

namespace {

// Per-pixel bin indices into one block, precomputed once per image.
struct PixelBins {
  std::vector<std::uint16_t> bins;  // 5 per pixel, offsets within a block
};

PixelBins pixel_bins(const RealRaster& lab, const StainImages& stains) {
  const auto lbp_h = lbp_map(stains.hematoxylin);
  const auto lbp_e = lbp_map(stains.eosin);
  PixelBins pb;
  pb.bins.resize(lab.pixels() * 5);
  for (std::size_t p = 0; p < lab.pixels(); ++p) {
    for (int ch = 0; ch < 3; ++ch) {
      pb.bins[5 * p + ch] = static_cast<std::uint16_t>(ch * kLabBins + lab_bin(ch, lab.data[3 * p + ch]));
    }
    pb.bins[5 * p + 3] = static_cast<std::uint16_t>(3 * kLabBins + lbp_h.data[p]);
    pb.bins[5 * p + 4] = static_cast<std::uint16_t>(3 * kLabBins + kLbpBins + lbp_e.data[p]);
  }
  return pb;
}

// Each of the five histograms in the block sums to the region size; scale to 1.
void normalize_block(float* block, std::uint64_t count) {
  if (count == 0) return;
  const float n = static_cast<float>(count);
  for (int i = 0; i < kBlockDims; ++i) block[i] /= n;
}

}  // namespace

FeatureMatrix neighborhood_features(const RealRaster& lab, const StainImages& stains,
                                    const SuperpixelMap& map, const FeatureOptions& opts) {
  if (!(opts.inner_radius > 0.0 && opts.outer_radius > opts.inner_radius)) {
    throw ConfigError("feature radii must satisfy 0 < inner < outer");
  }
  if (lab.height != map.height || lab.width != map.width || stains.hematoxylin.height != map.height ||
      stains.hematoxylin.width != map.width) {
    throw DataError("feature inputs disagree in size");
  }
  const PixelBins pb = pixel_bins(lab, stains);
  const int h = map.height, w = map.width;
  FeatureMatrix f;
  f.rows = map.count;
  f.dims = kFeatureDims;
  f.data.assign(static_cast<std::size_t>(f.rows) * f.dims, 0.0f);
  std::vector<std::uint64_t> own(map.count, 0);
  for (std::size_t p = 0; p < map.ids.size(); ++p) {
    float* block = f.row(map.ids[p]);
    for (int k = 0; k < 5; ++k) block[pb.bins[5 * p + k]] += 1.0f;
    ++own[map.ids[p]];
  }
  const double r1sq = opts.inner_radius * opts.inner_radius;
  const double r2sq = opts.outer_radius * opts.outer_radius;
  for (int s = 0; s < map.count; ++s) {
    normalize_block(f.row(s), own[s]);
    float* inner = f.row(s) + kBlockDims;
    float* outer = f.row(s) + 2 * kBlockDims;
    const double cy = map.centroids[s][0], cx = map.centroids[s][1];
    const int r0 = std::max(0, static_cast<int>(std::ceil(cy - opts.outer_radius)));
    const int r1 = std::min(h - 1, static_cast<int>(std::floor(cy + opts.outer_radius)));
    const int c0 = std::max(0, static_cast<int>(std::ceil(cx - opts.outer_radius)));
    const int c1 = std::min(w - 1, static_cast<int>(std::floor(cx + opts.outer_radius)));
    std::uint64_t n_inner = 0, n_outer = 0;
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) {
        const double d = (r - cy) * (r - cy) + (c - cx) * (c - cx);
        if (d > r2sq) continue;
        const std::size_t p = static_cast<std::size_t>(r) * w + c;
        float* block;
        if (d <= r1sq) {
          if (map.ids[p] == s) continue;
          block = inner;
          ++n_inner;
        } else {
          block = outer;
          ++n_outer;
        }
        for (int k = 0; k < 5; ++k) block[pb.bins[5 * p + k]] += 1.0f;
      }
    normalize_block(inner, n_inner);
    normalize_block(outer, n_outer);
  }
  return f;
}

FeatureMatrix image_features(const Image& image, const SuperpixelMap& map, const FeatureOptions& opts) {
  return neighborhood_features(rgb_to_lab(image), color_deconvolution(image), map, opts);
}

std::string feature_layout_text() {
  std::ostringstream os;
  os << "dims " << kFeatureDims << "\n";
  int offset = 0;
  for (const char* region : {"superpixel", "ring_inner", "ring_outer"}) {
    for (const char* h : {"lab_L", "lab_a", "lab_b"}) {
      os << region << "." << h << " " << offset << " " << kLabBins << "\n";
      offset += kLabBins;
    }
    for (const char* h : {"lbp_hematoxylin", "lbp_eosin"}) {
      os << region << "." << h << " " << offset << " " << kLbpBins << "\n";
      offset += kLbpBins;
    }
  }
  return os.str();
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_feature_dump(const std::filesystem::path& path, const FeatureMatrix& features) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (int i = 0; i < features.rows; ++i) {
    put_u32(out, static_cast<std::uint32_t>(i));
    put_u32(out, static_cast<std::uint32_t>(features.dims));
    for (int k = 0; k < features.dims; ++k) put_u32(out, std::bit_cast<std::uint32_t>(features.row(i)[k]));
  }
  std::ofstream header(path.string() + ".txt");
  header << feature_layout_text();
  if (!out || !header) throw DataError("failed writing " + path.string());
}

FeatureMatrix read_feature_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  const std::string s = os.str();
  const auto* b = reinterpret_cast<const unsigned char*>(s.data());
  FeatureMatrix f;
  std::size_t at = 0;
  while (at < s.size()) {
    if (at + 8 > s.size()) throw DataError(path.string() + ": truncated record header");
    const std::uint32_t id = get_u32(b + at), dims = get_u32(b + at + 4);
    at += 8;
    if (id != static_cast<std::uint32_t>(f.rows)) throw DataError(path.string() + ": records out of order");
    if (f.rows == 0) f.dims = static_cast<int>(dims);
    if (dims != static_cast<std::uint32_t>(f.dims)) throw DataError(path.string() + ": inconsistent dims");
    if (at + 4ull * dims > s.size()) throw DataError(path.string() + ": truncated record");
    for (std::uint32_t k = 0; k < dims; ++k) f.data.push_back(std::bit_cast<float>(get_u32(b + at + 4 * k)));
    at += 4ull * dims;
    ++f.rows;
  }
  return f;
}

}  // namespace wsseg
