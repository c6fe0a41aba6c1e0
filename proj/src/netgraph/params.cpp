#include "wsseg/netgraph/params.hpp"

#include <unordered_map>

namespace wsseg {

template <typename T>
void ParameterSet<T>::check_unique(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) throw std::logic_error("duplicate parameter name " + name);
  for (const auto& b : buffers_)
    if (b.first == name) throw std::logic_error("duplicate buffer name " + name);
}

template <typename T>
Var<T> ParameterSet<T>::add_param(const std::string& name, Tensor<T> value, bool decay) {
  check_unique(name);
  Var<T> v = parameter(std::move(value));
  params_.push_back({name, v, decay});
  return v;
}

template <typename T>
Var<T> ParameterSet<T>::add_buffer(const std::string& name, Tensor<T> value) {
  check_unique(name);
  Var<T> v = constant(std::move(value));
  buffers_.emplace_back(name, v);
  return v;
}

template <typename T>
std::size_t ParameterSet<T>::count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.var.value().size();
  return n;
}

template <typename T>
void ParameterSet<T>::zero_grad() {
  for (auto& p : params_) p.var.zero_grad();
}

template <typename T>
std::vector<ArchiveEntry> ParameterSet<T>::to_archive() const {
  std::vector<ArchiveEntry> out;
  out.reserve(params_.size() + buffers_.size());
  for (const auto& p : params_) out.push_back(to_entry(p.name, p.var.value()));
  for (const auto& [name, v] : buffers_) out.push_back(to_entry(name, v.value()));
  return out;
}

template <typename T>
void ParameterSet<T>::load_archive(const std::vector<ArchiveEntry>& entries) {
  std::unordered_map<std::string, const ArchiveEntry*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e;
  auto assign = [&](const std::string& name, Var<T> v) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError("checkpoint is missing tensor '" + name + "'");
    Tensor<T> t = to_tensor<T>(*it->second);
    if (t.shape() != v.shape()) {
      throw DataError("checkpoint tensor '" + name + "' has shape " + t.shape().str() +
                      ", model expects " + v.shape().str());
    }
    v.value() = std::move(t);
  };
  for (auto& p : params_) assign(p.name, p.var);
  for (auto& [name, v] : buffers_) assign(name, v);
}

template class ParameterSet<float>;
template class ParameterSet<double>;

}  // namespace wsseg
