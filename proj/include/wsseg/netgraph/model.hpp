#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wsseg/netgraph/blocks.hpp"

namespace wsseg {

/// One encoder-decoder network consuming a single resolution.
template <typename T>
struct Instance {
  ConvBn<T> stem;                                      // encoder level 1
  std::vector<std::vector<Rcu<T>>> blocks;             // levels 2..L, index l-2
  std::vector<std::vector<InputInjection<T>>> inject;  // parallel to blocks when IA is on
  DenseDecoder<T> dense;
  std::optional<SparseDecoder<T>> sparse;

  /// Encoder outputs x_e^1..x_e^L.
  std::vector<Var<T>> encode(const Var<T>& x, bool training);
  Var<T> forward(const Var<T>& x, bool training);
};

/// A complete (possibly multi-resolution) network built from a ModelConfig.
template <typename T>
class Model {
 public:
  Model(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParameterSet<T>& parameters() { return params_; }
  const ParameterSet<T>& parameters() const { return params_; }
  const std::vector<LayerInfo>& layers() const { return layers_; }

  /// Input: N x 3 x (S + 2B) x (S + 2B) with B the largest instance border;
  /// output: N x C x S x S.
  Var<T> forward(const Var<T>& input, bool training);
  Var<T> forward_instance(int p, const Var<T>& x, bool training);

  int instance_count() const { return static_cast<int>(instances_.size()); }
  Instance<T>& instance(int p) { return instances_.at(p); }
  Fusion<T>* fusion() { return fusion_ ? &*fusion_ : nullptr; }

  std::size_t param_count() const { return params_.count(); }
  std::size_t instance_param_count(int p) const;
  std::size_t fusion_param_count() const;

  /// (encoder level, dense-decoder level) pairs of instance 0.
  std::vector<std::pair<int, int>> dense_links() const;

  /// Instances run on separate threads when n > 1.
  void set_threads(int n) { threads_ = n; }

 private:
  ModelConfig config_;
  ParameterSet<T> params_;
  std::vector<LayerInfo> layers_;
  std::vector<Instance<T>> instances_;
  std::optional<Fusion<T>> fusion_;
  int threads_ = 1;
};

/// Per-layer table (shape, stride, dilation, parameters) for an input patch.
std::string architecture_summary(const ModelConfig& config, const std::vector<LayerInfo>& layers);

/// Parameter count of the model described by `config`.
std::size_t count_params(const ModelConfig& config);

extern template class Model<float>;
extern template class Model<double>;

}  // namespace wsseg
