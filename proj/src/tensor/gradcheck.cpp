#include "wsseg/tensor/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wsseg {

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os << name << ": max_rel_err=" << max_rel_error << " over " << checked << " entries";
  if (kinks_skipped) os << " (" << kinks_skipped << " kinks skipped)";
  if (!worst_tensor.empty()) {
    os << ", worst " << worst_tensor << "[" << worst_index << "] analytic=" << worst_analytic
       << " numeric=" << worst_numeric;
  }
  os << (passed ? " PASS" : " FAIL");
  return os.str();
}

GradCheckReport grad_check(const std::function<Var<double>()>& loss_fn,
                           const std::vector<NamedVar>& wrt, const GradCheckOptions& opts) {
  GradCheckReport report;
  for (const auto& [name, v] : wrt) {
    auto var = v;
    var.zero_grad();
  }
  const Var<double> base = loss_fn();
  base.backward();
  const double f0 = base.value()[0];

  std::vector<Tensor<double>> analytic;
  analytic.reserve(wrt.size());
  for (const auto& [name, v] : wrt) {
    analytic.push_back(v.has_grad() ? v.grad() : Tensor<double>(v.shape()));
  }

  const double h = opts.step;
  for (std::size_t t = 0; t < wrt.size(); ++t) {
    Var<double> var = wrt[t].second;
    auto& values = var.value();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double orig = values[i];
      values[i] = orig + h;
      const double fp = loss_fn().value()[0];
      values[i] = orig - h;
      const double fm = loss_fn().value()[0];
      values[i] = orig;

      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[t][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), opts.abs_floor});
      double err = std::abs(a - numeric) / denom;
      if (err > opts.tolerance) {
        const double fwd = (fp - f0) / h;
        const double bwd = (f0 - fm) / h;
        const double scale = std::max({std::abs(fwd), std::abs(bwd), opts.abs_floor});
        if (std::abs(fwd - bwd) > 10.0 * opts.tolerance * scale) {
          ++report.kinks_skipped;
          continue;
        }
      }
      ++report.checked;
      if (!std::isfinite(err)) err = INFINITY;
      if (err > report.max_rel_error || report.worst_tensor.empty()) {
        report.max_rel_error = std::max(report.max_rel_error, err);
        if (err >= report.max_rel_error) {
          report.worst_tensor = wrt[t].first;
          report.worst_index = i;
          report.worst_analytic = a;
          report.worst_numeric = numeric;
        }
      }
    }
  }
  report.passed = report.max_rel_error < opts.tolerance && report.checked > 0;
  return report;
}

}  // namespace wsseg
