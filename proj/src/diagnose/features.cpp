#include "wsseg/diagnose/features.hpp"

#include "wsseg/classicseg/baseline.hpp"

namespace wsseg {

int label_pair_index(int a, int b) {
  if (a > b) std::swap(a, b);
  return a * kTissueLabels - a * (a - 1) / 2 + (b - a);
}

std::vector<int> superpixel_labels(const LabelMask& mask, const SuperpixelMap& map) {
  return majority_labels(map, mask, kTissueLabels);
}

std::string to_string(FeatureVariant v) { return v == FeatureVariant::kAllLabels ? "all_labels" : "no_stroma"; }

FeatureVariant parse_feature_variant(const std::string& s) {
  if (s == "all_labels") return FeatureVariant::kAllLabels;
  if (s == "no_stroma") return FeatureVariant::kNoStroma;
  throw ConfigError("unknown feature variant '" + s + "' (all_labels, no_stroma)");
}

bool is_stroma(int label) { return label == 3 || label == 4; }

std::vector<double> CaseFeatures::vector(FeatureVariant v) const {
  const bool all = v == FeatureVariant::kAllLabels;
  const auto& f = all ? frequency : frequency_no_stroma;
  const auto& c = all ? cooccurrence : cooccurrence_no_stroma;
  std::vector<double> out(f.begin(), f.end());
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

namespace {

template <std::size_t N>
bool normalize(std::array<double, N>& h) {
  double s = 0;
  for (double v : h) s += v;
  if (s == 0) return false;
  for (double& v : h) v /= s;
  return true;
}

}  // namespace

CaseFeatures case_features(const std::vector<int>& labels, const std::vector<std::vector<int>>& adjacency) {
  if (labels.empty()) throw DataError("case has no superpixels");
  if (adjacency.size() != labels.size()) throw DataError("adjacency list size differs from label count");
  auto valid = [](int l) { return l >= 0 && l < kTissueLabels; };
  for (int l : labels)
    if (!valid(l) && l != kIgnoreLabel) throw DataError("superpixel label " + std::to_string(l) + " out of range");
  CaseFeatures f;
  for (int l : labels) {
    if (!valid(l)) continue;
    f.frequency[l] += 1;
    if (!is_stroma(l)) f.frequency_no_stroma[l] += 1;
  }
  for (std::size_t s = 0; s < labels.size(); ++s)
    for (int t : adjacency[s]) {
      if (t <= static_cast<int>(s)) continue;
      const int a = labels[s], b = labels[t];
      if (!valid(a) || !valid(b)) continue;
      f.cooccurrence[label_pair_index(a, b)] += 1;
      if (!is_stroma(a) && !is_stroma(b)) f.cooccurrence_no_stroma[label_pair_index(a, b)] += 1;
    }
  if (!normalize(f.frequency)) throw DataError("case has no labelled superpixels");
  normalize(f.frequency_no_stroma);
  f.no_edges = !normalize(f.cooccurrence);
  f.no_edges_no_stroma = !normalize(f.cooccurrence_no_stroma);
  return f;
}

}  // namespace wsseg
