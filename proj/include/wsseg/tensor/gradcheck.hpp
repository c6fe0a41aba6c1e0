#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "wsseg/tensor/var.hpp"

namespace wsseg {

struct GradCheckOptions {
  double step = 1e-5;       // central-difference half width
  double tolerance = 1e-4;  // max relative error
  double abs_floor = 1e-5;  // denominator floor; sits above round-off noise at h = 1e-5
};

struct GradCheckReport {
  std::string name;
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  std::size_t kinks_skipped = 0;  // coordinates where a ReLU kink was crossed
  bool passed = true;

  std::string summary() const;
};

using NamedVar = std::pair<std::string, Var<double>>;

/// Compare reverse-mode gradients of `loss_fn` w.r.t. every entry of `wrt`
/// against central finite differences. `loss_fn` must rebuild the graph on
/// each call and be deterministic. Failures are reported, never thrown.
///
/// A coordinate whose one-sided differences disagree strongly sits on a
/// non-differentiable point (ReLU at 0); it is excluded and counted.
GradCheckReport grad_check(const std::function<Var<double>()>& loss_fn,
                           const std::vector<NamedVar>& wrt, const GradCheckOptions& opts = {});

}  // namespace wsseg
