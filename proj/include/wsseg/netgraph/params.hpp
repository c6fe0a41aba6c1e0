#pragma once

#include <string>
#include <vector>

#include "wsseg/tensor/archive.hpp"
#include "wsseg/tensor/var.hpp"

namespace wsseg {

template <typename T>
struct NamedParam {
  std::string name;
  Var<T> var;
  bool decay;  // false for batch-norm affine terms and biases
};

/// Trainable parameters plus non-trainable buffers (batch-norm running
/// statistics), both addressable by name for checkpointing.
template <typename T>
class ParameterSet {
 public:
  Var<T> add_param(const std::string& name, Tensor<T> value, bool decay);
  Var<T> add_buffer(const std::string& name, Tensor<T> value);

  const std::vector<NamedParam<T>>& params() const { return params_; }
  const std::vector<std::pair<std::string, Var<T>>>& buffers() const { return buffers_; }

  /// Number of trainable scalars.
  std::size_t count() const;
  void zero_grad();

  std::vector<ArchiveEntry> to_archive() const;
  /// Every parameter and buffer must be present with a matching shape.
  void load_archive(const std::vector<ArchiveEntry>& entries);

 private:
  void check_unique(const std::string& name) const;

  std::vector<NamedParam<T>> params_;
  std::vector<std::pair<std::string, Var<T>>> buffers_;
};

extern template class ParameterSet<float>;
extern template class ParameterSet<double>;

}  // namespace wsseg
