#pragma once

#include <cstdint>
#include <vector>

#include "wsseg/classicseg/svm.hpp"
#include "wsseg/metrics/metrics.hpp"
#include "wsseg/trainer/data.hpp"

namespace wsseg {

struct BaselineOptions {
  int classes = 8;
  SlicOptions slic;
  FeatureOptions features;
  SvmOptions svm;
  int per_label_cap = 2000;  // training superpixels per label per image
};

/// Most frequent non-ignored mask label in each superpixel (ties to the
/// smaller label), or kIgnoreLabel when every pixel is ignored.
std::vector<int> majority_labels(const SuperpixelMap& map, const LabelMask& mask, int classes);

/// Superpixel features with their majority labels, pooled over images.
struct SuperpixelTable {
  FeatureMatrix features;
  std::vector<int> labels;
};

/// Segments, featurizes and labels each sample, keeping at most
/// `per_label_cap` superpixels per label per image (seeded choice).
SuperpixelTable build_superpixel_table(const std::vector<Sample>& samples, const BaselineOptions& opts);

LinearSvm baseline_train(const std::vector<Sample>& samples, const BaselineOptions& opts);

/// Pixel labels painted from per-superpixel predictions.
LabelMask baseline_predict(const Image& image, const LinearSvm& svm, const BaselineOptions& opts,
                           SuperpixelMap* map_out = nullptr);

struct BaselineEvaluation {
  double superpixel_accuracy = 0.0;  // vs majority labels
  Scores pixel;
};

BaselineEvaluation evaluate_baseline(const std::vector<Sample>& samples, const LinearSvm& svm,
                                     const BaselineOptions& opts);

}  // namespace wsseg
