#pragma once

#include <cstdint>
#include <vector>

#include "wsseg/diagnose/crossval.hpp"

namespace wsseg {

/// Superpixel labels on a `side` x `side` grid drawn from a diagnosis-specific
/// tissue profile: the diagnosis' marker label with probability `purity`,
/// otherwise uniform over all labels.
struct SyntheticCase {
  Diagnosis diagnosis;
  int side;
  std::vector<int> labels;  // row-major grid
};

SyntheticCase synthetic_case(Diagnosis d, int side, double purity, Rng& rng);

/// 4-neighbour adjacency of a side x side grid of superpixels.
std::vector<std::vector<int>> grid_adjacency(int side);

/// `per_class` cases of every diagnosis with features of the chosen variant.
std::vector<DiagnosisCase> synthetic_cases(int per_class, std::uint64_t seed, FeatureVariant variant,
                                           int side = 10, double purity = 0.7);

/// Marker tissue label of each diagnosis in synthetic cases.
int marker_label(Diagnosis d);

}  // namespace wsseg
