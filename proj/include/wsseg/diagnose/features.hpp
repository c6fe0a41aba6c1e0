#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wsseg/classicseg/slic.hpp"
#include "wsseg/image/raster.hpp"

namespace wsseg {

inline constexpr int kTissueLabels = 8;
inline constexpr int kLabelPairs = kTissueLabels * (kTissueLabels + 1) / 2;  // 36

/// Index of the unordered pair {a, b} in the upper triangle (row-major, diagonal included).
int label_pair_index(int a, int b);

/// Modal mask label per superpixel, ties to the smaller label; superpixels
/// with only ignored pixels get kIgnoreLabel.
std::vector<int> superpixel_labels(const LabelMask& mask, const SuperpixelMap& map);

enum class FeatureVariant { kAllLabels, kNoStroma };
std::string to_string(FeatureVariant v);
FeatureVariant parse_feature_variant(const std::string& s);

struct CaseFeatures {
  std::array<double, kTissueLabels> frequency{};
  std::array<double, kLabelPairs> cooccurrence{};
  std::array<double, kTissueLabels> frequency_no_stroma{};
  std::array<double, kLabelPairs> cooccurrence_no_stroma{};
  bool no_edges = false;            // co-occurrence left all zero
  bool no_edges_no_stroma = false;

  /// Frequency then co-occurrence (44 values) of the chosen variant.
  std::vector<double> vector(FeatureVariant v) const;
};

/// Labels 3 and 4 (normal and desmoplastic stroma).
bool is_stroma(int label);

/// Counts superpixels per label and adjacency edges per unordered label pair,
/// each normalized to sum 1. Superpixels labelled kIgnoreLabel are skipped,
/// as are stroma superpixels in the stroma-excluded variant.
CaseFeatures case_features(const std::vector<int>& labels, const std::vector<std::vector<int>>& adjacency);

}  // namespace wsseg
