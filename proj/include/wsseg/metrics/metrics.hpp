#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wsseg/image/raster.hpp"

namespace wsseg {

/// C x C pixel counts; entry (g, p) counts ground truth g predicted as p.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int classes);

  int classes() const { return classes_; }
  std::uint64_t at(int g, int p) const { return counts_[static_cast<std::size_t>(g) * classes_ + p]; }
  void add(int g, int p, std::uint64_t n = 1);

  /// Pixels whose ground truth is kIgnoreLabel are skipped. `width` only
  /// serves error messages (row/column of a bad label).
  void accumulate(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt, int width);
  void accumulate(const LabelMask& pred, const LabelMask& gt);

  /// Sums another matrix into this one (associative and commutative).
  void merge(const ConfusionMatrix& other);

  std::uint64_t total() const;
  std::uint64_t gt_count(int c) const;
  std::uint64_t pred_count(int c) const;
  bool operator==(const ConfusionMatrix&) const = default;

 private:
  int classes_;
  std::vector<std::uint64_t> counts_;
};

/// Per-class entries are NaN where their denominator is zero. Macro means
/// average over classes present in the ground truth.
struct Scores {
  double pa = 0;
  double miou = 0;
  double f1_macro = 0;
  std::vector<double> iou;
  std::vector<double> f1;
  std::vector<double> accuracy;
  std::vector<bool> present;
};

Scores compute_scores(const ConfusionMatrix& cm);

/// Human-readable table: one row per class and a summary line.
std::string score_table(const Scores& s, const std::vector<std::string>& names = {});
/// CSV with header "class,iou,f1,accuracy,present", one row per class, then
/// a summary row "all,<miou>,<f1_macro>,<pa>,".
std::string score_csv(const Scores& s);

/// Conventional names of the eight tissue labels, index order.
const std::vector<std::string>& tissue_label_names();

}  // namespace wsseg
