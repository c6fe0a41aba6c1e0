#pragma once

#include <cstdint>
#include <vector>

#include "wsseg/tensor/gradcheck.hpp"

namespace wsseg {

struct GradSuiteOptions {
  std::uint64_t seed = 1;
  bool include_model = true;  // end-to-end L=3, channel_scale 1/8 network
  double tolerance = 1e-4;
};

/// Finite-difference checks in 64-bit for every differentiable op and each
/// composite block (RCU, IA-RCU, dense and sparse decoding, fusion variants)
/// on inputs no larger than 1x4x8x8.
std::vector<GradCheckReport> run_grad_suite(const GradSuiteOptions& opts = {});

}  // namespace wsseg
