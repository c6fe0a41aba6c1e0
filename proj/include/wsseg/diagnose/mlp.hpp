#pragma once

#include <cstdint>
#include <vector>

#include "wsseg/netgraph/params.hpp"

namespace wsseg {

struct MlpOptions {
  int hidden = 64;
  int epochs = 200;
  int batch_size = 16;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::uint64_t seed = 1;
};

/// One hidden ReLU layer and a softmax output, both as 1x1 convolutions over
/// an N x D x 1 x 1 input.
class Mlp {
 public:
  Mlp(int dims, int classes, const MlpOptions& opts);
  Mlp(const Mlp&) = delete;
  Mlp& operator=(const Mlp&) = delete;
  Mlp(Mlp&&) = default;

  int dims() const { return dims_; }
  int classes() const { return classes_; }
  ParameterSet<double>& parameters() { return params_; }

  /// Class scores (N x classes) for row-major rows of `dims` values.
  Var<double> forward(const std::vector<double>& rows) const;
  std::vector<int> predict(const std::vector<double>& rows) const;

 private:
  int dims_;
  int classes_;
  ParameterSet<double> params_;
  Var<double> w1_, b1_, w2_, b2_;
};

/// Minibatch SGD on mean cross-entropy over shuffled epochs. Throws
/// NumericalError naming the epoch and batch when the loss is not finite.
Mlp mlp_train(const std::vector<double>& rows, const std::vector<int>& labels, int dims, int classes,
              const MlpOptions& opts);

}  // namespace wsseg
