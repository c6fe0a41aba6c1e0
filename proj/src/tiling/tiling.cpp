#include "wsseg/tiling/tiling.hpp"

#include <fstream>
#include <sstream>

namespace wsseg {

PatchGrid PatchGrid::make(int height, int width, int patch, int stride) {
  if (height < 1 || width < 1) throw DataError("cannot tile an empty image");
  if (patch < 1 || stride < 1 || stride > patch) throw ConfigError("invalid patch geometry");
  PatchGrid g;
  g.height = height;
  g.width = width;
  g.patch = patch;
  g.stride = stride;
  auto origins = [&](int n) {
    const int extra = n > patch ? (n - patch + stride - 1) / stride : 0;
    std::vector<int> o;
    for (int k = 0; k <= extra; ++k) o.push_back(k * stride);
    return o;
  };
  g.row_origins = origins(height);
  g.col_origins = origins(width);
  for (int r : g.row_origins)
    for (int c : g.col_origins) {
      const int index = static_cast<int>(g.records.size());
      g.records.push_back({index, r, c, std::max(0, r + patch - height), std::max(0, c + patch - width)});
    }
  return g;
}

int symmetric_index(int i, int n) {
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

template <typename T>
Raster<T> extract_window(const Raster<T>& src, int row0, int col0, int h, int w) {
  if (src.height < 1 || src.width < 1) throw DataError("cannot extract from an empty raster");
  Raster<T> out(h, w, src.channels);
  std::vector<int> cols(w);
  for (int j = 0; j < w; ++j) cols[j] = symmetric_index(col0 + j, src.width);
  for (int i = 0; i < h; ++i) {
    const int r = symmetric_index(row0 + i, src.height);
    for (int j = 0; j < w; ++j)
      for (int ch = 0; ch < src.channels; ++ch) out.at(i, j, ch) = src.at(r, cols[j], ch);
  }
  return out;
}

template <typename T>
Raster<T> center_crop(const Raster<T>& src, int h, int w) {
  if (h > src.height || w > src.width || (src.height - h) % 2 || (src.width - w) % 2) {
    throw ConfigError("center_crop: target must fit with even margins");
  }
  return extract_window(src, (src.height - h) / 2, (src.width - w) / 2, h, w);
}

Stitcher::Stitcher(const PatchGrid& grid, int num_classes)
    : grid_(grid),
      classes_(num_classes),
      sums_(static_cast<std::size_t>(grid.height) * grid.width * num_classes, 0.0),
      counts_(static_cast<std::size_t>(grid.height) * grid.width, 0),
      seen_(grid.records.size(), false) {
  if (num_classes < 1) throw ConfigError("stitch needs at least one class");
}

void Stitcher::add(int index, const float* scores) {
  if (index < 0 || index >= static_cast<int>(grid_.records.size())) {
    throw DataError("stitch: patch index " + std::to_string(index) + " is not in the grid");
  }
  const auto& rec = grid_.records[index];
  const int P = grid_.patch;
  const std::size_t plane = static_cast<std::size_t>(P) * P;
  const int hmax = std::min(P, grid_.height - rec.row0);
  const int wmax = std::min(P, grid_.width - rec.col0);
  for (int i = 0; i < hmax; ++i)
    for (int j = 0; j < wmax; ++j) {
      const std::size_t px = static_cast<std::size_t>(rec.row0 + i) * grid_.width + rec.col0 + j;
      ++counts_[px];
      double* acc = &sums_[px * classes_];
      for (int c = 0; c < classes_; ++c) acc[c] += scores[c * plane + static_cast<std::size_t>(i) * P + j];
    }
  seen_[index] = true;
}

void Stitcher::check_complete() const {
  for (std::size_t i = 0; i < seen_.size(); ++i) {
    if (!seen_[i]) throw DataError("stitch: missing scores for patch " + std::to_string(i));
  }
}

LabelMask Stitcher::finish() const {
  check_complete();
  LabelMask out(grid_.height, grid_.width, 1);
  for (std::size_t px = 0; px < counts_.size(); ++px) {
    const double* acc = &sums_[px * classes_];
    int best = 0;
    for (int c = 1; c < classes_; ++c)
      if (acc[c] > acc[best]) best = c;
    out.data[px] = static_cast<std::uint8_t>(best);
  }
  return out;
}

Raster<float> Stitcher::mean_scores() const {
  check_complete();
  Raster<float> out(grid_.height, grid_.width, classes_);
  for (std::size_t px = 0; px < counts_.size(); ++px)
    for (int c = 0; c < classes_; ++c)
      out.data[px * classes_ + c] = static_cast<float>(sums_[px * classes_ + c] / counts_[px]);
  return out;
}

Raster<int> Stitcher::coverage() const {
  Raster<int> out(grid_.height, grid_.width, 1);
  out.data = counts_;
  return out;
}

std::string manifest_text(const PatchGrid& grid) {
  std::ostringstream os;
  os << "index\trow0\tcol0\tpad\n";
  for (const auto& r : grid.records) {
    os << r.index << '\t' << r.row0 << '\t' << r.col0 << '\t' << "0," << r.pad_bottom << ",0,"
       << r.pad_right << '\n';
  }
  return os.str();
}

void write_manifest(const std::filesystem::path& path, const PatchGrid& grid) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot open " + path.string() + " for writing");
  f << manifest_text(grid);
}

template Raster<std::uint8_t> extract_window(const Raster<std::uint8_t>&, int, int, int, int);
template Raster<float> extract_window(const Raster<float>&, int, int, int, int);
template Raster<std::uint8_t> center_crop(const Raster<std::uint8_t>&, int, int);
template Raster<float> center_crop(const Raster<float>&, int, int);

}  // namespace wsseg
