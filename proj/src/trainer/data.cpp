#include "wsseg/trainer/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "wsseg/common/error.hpp"
#include "wsseg/common/rng.hpp"
#include "wsseg/image/png_io.hpp"

namespace wsseg {

std::vector<double> class_weights_from_counts(const std::vector<std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (auto n : counts) total += n;
  if (total == 0) throw DataError("class weights: every pixel is ignored");
  const double C = static_cast<double>(counts.size());
  std::vector<double> w;
  for (auto n : counts) w.push_back(n ? static_cast<double>(total) / (C * static_cast<double>(n)) : 0.0);
  return w;
}

std::vector<double> class_weights(const std::vector<const LabelMask*>& masks, int classes) {
  std::vector<std::uint64_t> counts(classes, 0);
  for (const auto* m : masks)
    for (auto v : m->data) {
      if (v == kIgnoreLabel) continue;
      if (v >= classes) throw DataError("mask label " + std::to_string(v) + " >= classes");
      ++counts[v];
    }
  return class_weights_from_counts(counts);
}

std::vector<double> class_weights(const std::vector<Sample>& samples, int classes) {
  std::vector<const LabelMask*> masks;
  for (const auto& s : samples) masks.push_back(&s.mask);
  return class_weights(masks, classes);
}

Tensor<float> images_to_tensor(const std::vector<const Image*>& images) {
  if (images.empty()) throw UsageError("empty image batch");
  const int h = images[0]->height, w = images[0]->width;
  Tensor<float> t(Shape{static_cast<int>(images.size()), 3, h, w});
  for (std::size_t n = 0; n < images.size(); ++n) {
    const Image& img = *images[n];
    if (img.height != h || img.width != w || img.channels != 3) {
      throw DataError("images in a batch must share one RGB size");
    }
    for (int c = 0; c < 3; ++c)
      for (int r = 0; r < h; ++r)
        for (int q = 0; q < w; ++q)
          t(static_cast<int>(n), c, r, q) = (static_cast<float>(img.at(r, q, c)) - 128.0f) / 64.0f;
  }
  return t;
}

std::vector<std::uint8_t> masks_to_labels(const std::vector<const LabelMask*>& masks) {
  std::vector<std::uint8_t> out;
  for (const auto* m : masks) out.insert(out.end(), m->data.begin(), m->data.end());
  return out;
}

std::pair<std::vector<int>, std::vector<int>> split_indices(int n, double fraction,
                                                            std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("validation_fraction must be in (0,1)");
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx.begin(), idx.end());
  int nval = static_cast<int>(std::lround(n * fraction));
  if (n > 1) nval = std::clamp(nval, 1, n - 1);
  std::vector<int> val(idx.begin(), idx.begin() + nval);
  std::vector<int> train(idx.begin() + nval, idx.end());
  std::sort(val.begin(), val.end());
  std::sort(train.begin(), train.end());
  return {train, val};
}

std::array<double, 3> synth_class_color(int c) {
  // Red rises monotonically with the class; green and blue are shuffled so
  // neighbours in red differ in the other channels too.
  static const int green[8] = {150, 60, 200, 100, 30, 170, 80, 220};
  static const int blue[8] = {90, 200, 40, 160, 120, 230, 20, 140};
  return {40.0 + 25.0 * c, static_cast<double>(green[c % 8]), static_cast<double>(blue[c % 8])};
}

std::vector<Sample> synth_dataset(int count, int size, int classes, std::uint64_t seed) {
  if (classes < 1 || classes > 8) throw ConfigError("synthetic data supports 1..8 classes");
  if (count < 0 || size < 1) throw ConfigError("invalid synthetic dataset size");
  std::vector<double> cdf;
  double acc = 0;
  for (int c = 0; c < classes; ++c) cdf.push_back(acc += std::pow(0.7, c));
  Rng rng(seed);
  std::vector<Sample> out;
  for (int k = 0; k < count; ++k) {
    const int cells = std::max(2, size * size / 4096);
    struct Cell {
      double y, x;
      int label;
    };
    std::vector<Cell> seeds;
    for (int i = 0; i < cells; ++i) {
      const double u = rng.uniform() * acc;
      int label = 0;
      while (label < classes - 1 && u >= cdf[label]) ++label;
      seeds.push_back({rng.uniform(0, size), rng.uniform(0, size), label});
    }
    // Stripe period and orientation depend on the class; phase is random.
    std::vector<double> phase(classes);
    for (auto& p : phase) p = rng.uniform(0, 2 * std::numbers::pi);
    Sample s{Image(size, size, 3), LabelMask(size, size, 1)};
    for (int r = 0; r < size; ++r)
      for (int c = 0; c < size; ++c) {
        int best = 0;
        double bd = 1e300;
        for (int i = 0; i < cells; ++i) {
          const double d = (seeds[i].y - r) * (seeds[i].y - r) + (seeds[i].x - c) * (seeds[i].x - c);
          if (d < bd) {
            bd = d;
            best = i;
          }
        }
        const int label = seeds[best].label;
        s.mask.at(r, c) = static_cast<std::uint8_t>(label);
        const auto mean = synth_class_color(label);
        const double angle = label * std::numbers::pi / classes;
        const double period = 4.0 + 2.0 * label;
        const double t = (std::cos(angle) * c + std::sin(angle) * r) * 2 * std::numbers::pi / period;
        const double stripe = 14.0 * std::sin(t + phase[label]);
        for (int ch = 0; ch < 3; ++ch) {
          const double v = mean[ch] + (ch == 1 ? stripe : 0.5 * stripe) + rng.normal(0, 10.0);
          s.image.at(r, c, ch) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
      }
    out.push_back(std::move(s));
  }
  return out;
}

void save_dataset(const std::filesystem::path& dir, const std::vector<Sample>& samples) {
  std::filesystem::create_directories(dir / "images");
  std::filesystem::create_directories(dir / "masks");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%04zu.png", i);
    write_png(dir / "images" / name, samples[i].image);
    write_png(dir / "masks" / name, samples[i].mask);
  }
}

std::vector<Sample> load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir / "images") || !std::filesystem::is_directory(dir / "masks")) {
    throw DataError(dir.string() + " must contain images/ and masks/ directories");
  }
  std::vector<std::filesystem::path> names;
  for (const auto& e : std::filesystem::directory_iterator(dir / "images"))
    if (e.path().extension() == ".png") names.push_back(e.path().filename());
  std::sort(names.begin(), names.end());
  std::vector<Sample> out;
  for (const auto& n : names) {
    if (!std::filesystem::exists(dir / "masks" / n)) {
      throw DataError("missing mask " + (dir / "masks" / n).string());
    }
    out.push_back({read_png(dir / "images" / n, 3), read_png(dir / "masks" / n, 1)});
  }
  if (out.empty()) throw DataError("no PNG images in " + (dir / "images").string());
  return out;
}

}  // namespace wsseg
