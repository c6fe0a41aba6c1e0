#include "wsseg/trainer/sgd.hpp"

namespace wsseg {

template <typename T>
Sgd<T>::Sgd(ParameterSet<T>& params, SgdOptions opts) : params_(params), opts_(opts) {
  for (const auto& p : params_.params()) velocity_.emplace_back(p.var.shape());
}

template <typename T>
void Sgd<T>::step() {
  const T lr = static_cast<T>(opts_.learning_rate);
  const T mom = static_cast<T>(opts_.momentum);
  const T wd = static_cast<T>(opts_.weight_decay);
  const auto& ps = params_.params();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    Var<T> var = ps[i].var;
    Tensor<T>& value = var.value();
    T* v = velocity_[i].data();
    T* p = value.data();
    const T* g = var.has_grad() ? var.grad().data() : nullptr;
    const T decay = ps[i].decay ? wd : T(0);
    for (std::size_t k = 0; k < value.size(); ++k) {
      v[k] = mom * v[k] + (g ? g[k] : T(0)) + decay * p[k];
      p[k] -= lr * v[k];
    }
  }
}

template class Sgd<float>;
template class Sgd<double>;

}  // namespace wsseg
