#pragma once

#include <cstdint>
#include <vector>

#include "wsseg/classicseg/features.hpp"
#include "wsseg/tensor/archive.hpp"

namespace wsseg {

struct SvmOptions {
  double lambda = 1e-4;  // L2 weight of the mean-hinge objective
  int epochs = 20;
  std::uint64_t seed = 1;
};

/// One-vs-rest linear classifier; row c of `weights` holds dims weights then
/// the bias.
struct LinearSvm {
  int classes = 0;
  int dims = 0;
  std::vector<float> weights;  // rounded once after training so archives round-trip exactly

  double margin(int c, const float* x) const;
  /// Largest margin wins; ties go to the smaller class.
  int predict(const float* x) const;
  std::vector<int> predict(const FeatureMatrix& x) const;

  std::vector<ArchiveEntry> to_archive() const;
  static LinearSvm from_archive(const std::vector<ArchiveEntry>& entries);
};

/// Minimizes lambda/2 |w|^2 + mean hinge per class by stochastic subgradient
/// steps 1/(lambda t) over shuffled epochs, returning the average iterate of
/// the last half. The bias is folded in as a constant feature. Labels outside
/// 0..classes-1 are skipped. Throws ConfigError with fewer than two classes present.
LinearSvm linear_svm_train(const FeatureMatrix& x, const std::vector<int>& labels, int classes,
                           const SvmOptions& opts = {});

}  // namespace wsseg
