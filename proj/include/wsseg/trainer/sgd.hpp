#pragma once

#include <vector>

#include "wsseg/netgraph/params.hpp"

namespace wsseg {

struct SgdOptions {
  double learning_rate = 5e-4;
  double momentum = 0.9;
  double weight_decay = 5e-4;
};

/// Momentum SGD with coupled L2 decay:
///   v <- momentum * v + g + weight_decay * p   (decay only where flagged)
///   p <- p - learning_rate * v
template <typename T>
class Sgd {
 public:
  Sgd(ParameterSet<T>& params, SgdOptions opts);

  void step();
  const SgdOptions& options() const { return opts_; }
  void set_learning_rate(double lr) { opts_.learning_rate = lr; }
  const Tensor<T>& velocity(std::size_t i) const { return velocity_.at(i); }

 private:
  ParameterSet<T>& params_;
  SgdOptions opts_;
  std::vector<Tensor<T>> velocity_;
};

extern template class Sgd<float>;
extern template class Sgd<double>;

}  // namespace wsseg
