#include "wsseg/classicseg/baseline.hpp"

#include <algorithm>

#include "wsseg/common/rng.hpp"

namespace wsseg {

std::vector<int> majority_labels(const SuperpixelMap& map, const LabelMask& mask, int classes) {
  if (mask.height != map.height || mask.width != map.width) throw DataError("mask and superpixel map sizes differ");
  std::vector<std::vector<int>> votes(map.count, std::vector<int>(classes, 0));
  for (std::size_t p = 0; p < map.ids.size(); ++p) {
    const int v = mask.data[p];
    if (v == kIgnoreLabel) continue;
    if (v >= classes) throw DataError("mask label " + std::to_string(v) + " >= classes");
    ++votes[map.ids[p]][v];
  }
  std::vector<int> out(map.count, kIgnoreLabel);
  for (int s = 0; s < map.count; ++s) {
    int best = -1;
    for (int c = 0; c < classes; ++c)
      if (votes[s][c] > 0 && (best < 0 || votes[s][c] > votes[s][best])) best = c;
    if (best >= 0) out[s] = best;
  }
  return out;
}

SuperpixelTable build_superpixel_table(const std::vector<Sample>& samples, const BaselineOptions& opts) {
  if (opts.per_label_cap < 1) throw ConfigError("per_label_cap must be positive");
  SuperpixelTable t;
  t.features.dims = kFeatureDims;
  Rng rng(opts.svm.seed);
  for (const auto& s : samples) {
    const SuperpixelMap map = slic(s.image, opts.slic);
    const FeatureMatrix f = image_features(s.image, map, opts.features);
    const std::vector<int> labels = majority_labels(map, s.mask, opts.classes);
    for (int c = 0; c < opts.classes; ++c) {
      std::vector<int> rows;
      for (int i = 0; i < map.count; ++i)
        if (labels[i] == c) rows.push_back(i);
      if (static_cast<int>(rows.size()) > opts.per_label_cap) {
        rng.shuffle(rows.begin(), rows.end());
        rows.resize(opts.per_label_cap);
        std::sort(rows.begin(), rows.end());
      }
      for (int i : rows) {
        t.features.data.insert(t.features.data.end(), f.row(i), f.row(i) + f.dims);
        t.labels.push_back(c);
        ++t.features.rows;
      }
    }
  }
  return t;
}

LinearSvm baseline_train(const std::vector<Sample>& samples, const BaselineOptions& opts) {
  const SuperpixelTable t = build_superpixel_table(samples, opts);
  return linear_svm_train(t.features, t.labels, opts.classes, opts.svm);
}

LabelMask baseline_predict(const Image& image, const LinearSvm& svm, const BaselineOptions& opts,
                           SuperpixelMap* map_out) {
  SuperpixelMap map = slic(image, opts.slic);
  const std::vector<int> pred = svm.predict(image_features(image, map, opts.features));
  LabelMask out(image.height, image.width, 1);
  for (std::size_t p = 0; p < map.ids.size(); ++p) out.data[p] = static_cast<std::uint8_t>(pred[map.ids[p]]);
  if (map_out) *map_out = std::move(map);
  return out;
}

BaselineEvaluation evaluate_baseline(const std::vector<Sample>& samples, const LinearSvm& svm,
                                     const BaselineOptions& opts) {
  ConfusionMatrix cm(opts.classes);
  long correct = 0, total = 0;
  for (const auto& s : samples) {
    SuperpixelMap map;
    const LabelMask pred = baseline_predict(s.image, svm, opts, &map);
    cm.accumulate(pred, s.mask);
    const std::vector<int> truth = majority_labels(map, s.mask, opts.classes);
    // Every pixel of a superpixel carries its prediction; read the first one.
    std::vector<int> predicted(map.count, -1);
    for (std::size_t p = 0; p < map.ids.size(); ++p)
      if (predicted[map.ids[p]] < 0) predicted[map.ids[p]] = pred.data[p];
    for (int i = 0; i < map.count; ++i) {
      if (truth[i] == kIgnoreLabel) continue;
      ++total;
      correct += predicted[i] == truth[i];
    }
  }
  BaselineEvaluation e;
  e.superpixel_accuracy = total ? static_cast<double>(correct) / total : 0.0;
  e.pixel = compute_scores(cm);
  return e;
}

}  // namespace wsseg
