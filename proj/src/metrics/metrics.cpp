#include "wsseg/metrics/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace wsseg {

ConfusionMatrix::ConfusionMatrix(int classes)
    : classes_(classes), counts_(static_cast<std::size_t>(classes) * classes, 0) {
  if (classes < 1 || classes > 255) throw ConfigError("confusion matrix needs 1..255 classes");
}

void ConfusionMatrix::add(int g, int p, std::uint64_t n) {
  counts_[static_cast<std::size_t>(g) * classes_ + p] += n;
}

void ConfusionMatrix::accumulate(std::span<const std::uint8_t> pred,
                                 std::span<const std::uint8_t> gt, int width) {
  if (pred.size() != gt.size()) {
    throw DataError("prediction and ground truth differ in size (" + std::to_string(pred.size()) +
                    " vs " + std::to_string(gt.size()) + " pixels)");
  }
  const int w = std::max(width, 1);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const int g = gt[i];
    if (g == kIgnoreLabel) continue;
    const int p = pred[i];
    if (g >= classes_ || p >= classes_) {
      throw DataError("label " + std::to_string(g >= classes_ ? g : p) + " at (row " +
                      std::to_string(i / w) + ", col " + std::to_string(i % w) +
                      ") is outside 0.." + std::to_string(classes_ - 1));
    }
    ++counts_[static_cast<std::size_t>(g) * classes_ + p];
  }
}

void ConfusionMatrix::accumulate(const LabelMask& pred, const LabelMask& gt) {
  if (pred.height != gt.height || pred.width != gt.width) {
    throw DataError("prediction " + std::to_string(pred.height) + "x" + std::to_string(pred.width) +
                    " does not match ground truth " + std::to_string(gt.height) + "x" +
                    std::to_string(gt.width));
  }
  accumulate(pred.data, gt.data, gt.width);
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) throw ConfigError("cannot merge matrices of different sizes");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto v : counts_) t += v;
  return t;
}

std::uint64_t ConfusionMatrix::gt_count(int c) const {
  std::uint64_t t = 0;
  for (int p = 0; p < classes_; ++p) t += at(c, p);
  return t;
}

std::uint64_t ConfusionMatrix::pred_count(int c) const {
  std::uint64_t t = 0;
  for (int g = 0; g < classes_; ++g) t += at(g, c);
  return t;
}

Scores compute_scores(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw DataError("no scored pixels");
  const int C = cm.classes();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Scores s;
  std::uint64_t trace = 0;
  double iou_sum = 0, f1_sum = 0;
  int present = 0;
  for (int c = 0; c < C; ++c) {
    const auto tp = cm.at(c, c);
    const auto fn = cm.gt_count(c) - tp;
    const auto fp = cm.pred_count(c) - tp;
    trace += tp;
    const auto union_ = tp + fp + fn;
    s.iou.push_back(union_ ? static_cast<double>(tp) / static_cast<double>(union_) : nan);
    s.f1.push_back(union_ ? 2.0 * tp / static_cast<double>(2 * tp + fp + fn) : nan);
    const auto gtc = cm.gt_count(c);
    s.accuracy.push_back(gtc ? static_cast<double>(tp) / static_cast<double>(gtc) : nan);
    s.present.push_back(gtc > 0);
    if (gtc > 0) {
      ++present;
      iou_sum += s.iou.back();
      f1_sum += s.f1.back();
    }
  }
  s.pa = static_cast<double>(trace) / static_cast<double>(total);
  s.miou = iou_sum / present;
  s.f1_macro = f1_sum / present;
  return s;
}

const std::vector<std::string>& tissue_label_names() {
  static const std::vector<std::string> names{
      "background",        "benign_epithelium", "malignant_epithelium", "normal_stroma",
      "desmoplastic_stroma", "secretion",       "necrosis",             "blood"};
  return names;
}

std::string score_table(const Scores& s, const std::vector<std::string>& names) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << std::left << std::setw(22) << "class" << std::right << std::setw(8) << "IoU"
     << std::setw(8) << "F1" << std::setw(8) << "acc" << "\n";
  for (std::size_t c = 0; c < s.iou.size(); ++c) {
    const std::string name = c < names.size() ? names[c] : std::to_string(c);
    os << std::left << std::setw(22) << name << std::right;
    for (double v : {s.iou[c], s.f1[c], s.accuracy[c]}) {
      if (std::isnan(v)) os << std::setw(8) << "-";
      else os << std::setw(8) << v;
    }
    os << (s.present[c] ? "" : "  (absent)") << "\n";
  }
  os << "PA " << s.pa << "  mIOU " << s.miou << "  F1 " << s.f1_macro << "\n";
  return os.str();
}

std::string score_csv(const Scores& s) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "class,iou,f1,accuracy,present\n";
  for (std::size_t c = 0; c < s.iou.size(); ++c) {
    os << c << ',' << s.iou[c] << ',' << s.f1[c] << ',' << s.accuracy[c] << ','
       << (s.present[c] ? 1 : 0) << '\n';
  }
  os << "all," << s.miou << ',' << s.f1_macro << ',' << s.pa << ",\n";
  return os.str();
}

}  // namespace wsseg
