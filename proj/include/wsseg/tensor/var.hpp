#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "wsseg/tensor/tensor.hpp"

namespace wsseg {

template <typename T>
struct Node {
  Tensor<T> value;
  Tensor<T> grad;  // empty until first touched
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the inputs' grads.
  std::function<void(Node&)> backward;

  bool is_leaf() const noexcept { return !backward; }
  Tensor<T>& ensure_grad() {
    if (grad.size() != value.size()) grad = Tensor<T>(value.shape());
    return grad;
  }
};

/// Handle to a value in the recorded differentiation graph.
///
/// Copies share the underlying node. Leaves created with requires_grad are
/// trainable parameters; results of ops record their inputs only when at
/// least one input requires a gradient.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(Tensor<T> value, bool requires_grad = false)
      : node_(std::make_shared<Node<T>>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
  }

  bool defined() const noexcept { return node_ != nullptr; }
  const Tensor<T>& value() const& { return node_->value; }
  Tensor<T>& value() & { return node_->value; }
  // A temporary may hold the last reference to its node.
  Tensor<T> value() && { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  bool has_grad() const { return node_->grad.size() == node_->value.size() && !node_->value.empty(); }
  const Tensor<T>& grad() const { return node_->grad; }
  Tensor<T>& grad() { return node_->ensure_grad(); }
  void zero_grad() {
    if (has_grad()) node_->grad.fill(T(0));
  }

  /// Reverse-mode pass from this scalar. Leaf gradients accumulate across
  /// calls; interior gradients are recomputed each call.
  void backward() const;

  const std::shared_ptr<Node<T>>& node() const noexcept { return node_; }

  /// Build an op result. `fn` runs during backward with the result node.
  static Var make(Tensor<T> value, std::vector<Var> inputs,
                  std::function<void(Node<T>&)> fn) {
    Var out(std::move(value));
    bool any = false;
    for (const auto& in : inputs) any = any || in.requires_grad();
    if (any) {
      out.node_->requires_grad = true;
      out.node_->inputs.reserve(inputs.size());
      for (auto& in : inputs) out.node_->inputs.push_back(in.node_);
      out.node_->backward = std::move(fn);
    }
    return out;
  }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Graph-free constant.
template <typename T>
Var<T> constant(Tensor<T> value) {
  return Var<T>(std::move(value), false);
}

/// Trainable leaf.
template <typename T>
Var<T> parameter(Tensor<T> value) {
  return Var<T>(std::move(value), true);
}

extern template class Var<float>;
extern template class Var<double>;

}  // namespace wsseg
