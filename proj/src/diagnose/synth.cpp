#include "wsseg/diagnose/synth.hpp"

namespace wsseg {

int marker_label(Diagnosis d) {
  // benign epithelium, secretion, malignant epithelium, necrosis
  static constexpr int markers[4] = {1, 5, 2, 6};
  return markers[static_cast<int>(d)];
}

SyntheticCase synthetic_case(Diagnosis d, int side, double purity, Rng& rng) {
  SyntheticCase c{d, side, std::vector<int>(static_cast<std::size_t>(side) * side)};
  for (int& l : c.labels)
    l = rng.uniform() < purity ? marker_label(d) : static_cast<int>(rng.below(kTissueLabels));
  return c;
}

std::vector<std::vector<int>> grid_adjacency(int side) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(side) * side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      auto& a = adj[r * side + c];
      if (r > 0) a.push_back((r - 1) * side + c);
      if (c > 0) a.push_back(r * side + c - 1);
      if (c + 1 < side) a.push_back(r * side + c + 1);
      if (r + 1 < side) a.push_back((r + 1) * side + c);
    }
  return adj;
}

std::vector<DiagnosisCase> synthetic_cases(int per_class, std::uint64_t seed, FeatureVariant variant, int side,
                                           double purity) {
  Rng rng(seed);
  const auto adj = grid_adjacency(side);
  std::vector<DiagnosisCase> out;
  for (Diagnosis d : {Diagnosis::kBenign, Diagnosis::kAtypia, Diagnosis::kDcis, Diagnosis::kInvasive})
    for (int i = 0; i < per_class; ++i) {
      const SyntheticCase c = synthetic_case(d, side, purity, rng);
      out.push_back({to_string(d) + "_" + std::to_string(i), d, case_features(c.labels, adj).vector(variant)});
    }
  return out;
}

}  // namespace wsseg
