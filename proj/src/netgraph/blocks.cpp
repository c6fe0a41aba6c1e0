#include "wsseg/netgraph/blocks.hpp"

#include <cmath>

namespace wsseg {

template <typename T>
Var<T> ConvUnit<T>::forward(const Var<T>& x) const {
  return transposed ? conv_transpose2d(x, weight, bias, geom) : conv2d(x, weight, bias, geom);
}

template <typename T>
Var<T> BnUnit<T>::forward(const Var<T>& x, bool training) {
  return batch_norm(x, gamma, beta, stats, training);
}

template <typename T>
Var<T> ConvBn<T>::forward(const Var<T>& x, bool training) {
  Var<T> y = conv.forward(x);
  if (bn) y = bn->forward(y, training);
  return relu ? wsseg::relu(y) : y;
}

template <typename T>
Var<T> Rcu<T>::forward(const Var<T>& x, bool training) {
  Var<T> r = second.forward(first.forward(x, training), training);
  Var<T> s = projection ? projection->forward(x, training) : x;
  return relu(add(r, s));
}

int power_of_two_steps(int big, int small) {
  if (small < 1 || big < small || big % small != 0) {
    throw ConfigError("input-image size " + std::to_string(big) +
                      " is not a power-of-two multiple of block size " + std::to_string(small));
  }
  const int ratio = big / small;
  if ((ratio & (ratio - 1)) != 0) {
    throw ConfigError("input-image to block size ratio " + std::to_string(ratio) +
                      " is not a power of two");
  }
  int steps = 0;
  while ((1 << steps) < ratio) ++steps;
  return steps;
}

template <typename T>
std::vector<Var<T>> image_pyramid(const Var<T>& image, int depth) {
  std::vector<Var<T>> out{image};
  for (int j = 0; j < depth; ++j) out.push_back(avg_pool3x3(out.back(), 2));
  return out;
}

template <typename T>
Var<T> InputInjection<T>::forward(const Var<T>& x_block, const std::vector<Var<T>>& pyramid,
                                  bool training) {
  if (pool_steps >= static_cast<int>(pyramid.size())) {
    throw std::logic_error("image pyramid too shallow for injection");
  }
  const Var<T>& img = pyramid[pool_steps];
  if (img.shape().h != x_block.shape().h || img.shape().w != x_block.shape().w) {
    throw ConfigError("pooled image " + img.shape().str() + " does not match block " +
                      x_block.shape().str());
  }
  return add(x_block, project.forward(mix.forward(img, training), training));
}

template <typename T>
Var<T> ia_rcu_forward(const Var<T>& x_block, const Var<T>& image, InputInjection<T>& ia,
                      bool training) {
  const int steps = power_of_two_steps(image.shape().h, x_block.shape().h);
  if (power_of_two_steps(image.shape().w, x_block.shape().w) != steps) {
    throw ConfigError("input-image and block aspect ratios differ");
  }
  if (steps != ia.pool_steps) {
    throw ConfigError("injection built for " + std::to_string(ia.pool_steps) +
                      " pooling steps, sizes need " + std::to_string(steps));
  }
  return ia.forward(x_block, image_pyramid(image, steps), training);
}

template <typename T>
Var<T> DecoderLevel<T>::forward(const Var<T>& prev, std::vector<std::vector<Var<T>>>& pooled,
                                bool training) {
  Var<T> y = up.forward(prev, training);
  for (auto& [i, link] : links) {
    auto& chain = pooled[i - 1];
    while (static_cast<int>(chain.size()) <= level - i) chain.push_back(avg_pool3x3(chain.back(), 2));
    y = add(y, link.forward(chain[level - i], training));
  }
  return y;
}

template <typename T>
Var<T> DenseDecoder<T>::forward(const std::vector<Var<T>>& encoder_outputs, bool training) {
  std::vector<std::vector<Var<T>>> pooled;
  for (const auto& e : encoder_outputs) pooled.push_back({e});
  Var<T> y = encoder_outputs.back();
  for (int l = static_cast<int>(levels.size()); l >= 1; --l) y = levels[l - 1].forward(y, pooled, training);
  return head.forward(y);
}

template <typename T>
Var<T> SparseDecoder<T>::forward(const std::vector<Var<T>>& encoder_outputs) const {
  const int L = static_cast<int>(project.size());
  Var<T> s = project[L - 1].forward(encoder_outputs[L - 1]);
  for (int l = L - 1; l >= 1; --l) {
    s = add(project[l - 1].forward(encoder_outputs[l - 1]), up[l].forward(s));
  }
  return up[0].forward(s);
}

FusionSpec fusion_spec(FusionKind kind) {
  FusionSpec s;
  s.kind = kind;
  switch (kind) {
    case FusionKind::kNone:
      break;
    case FusionKind::kOurs:
      for (int r : {1, 2, 4, 8, 16, 1}) s.layers.emplace_back(3, r);
      s.identity_links = true;
      break;
    case FusionKind::kFusionA:
      s.layers = {{3, 1}, {3, 1}, {3, 1}};
      break;
    case FusionKind::kFusionB:
      s.layers = {{3, 6}, {3, 12}, {3, 18}};
      s.parallel = true;
      break;
  }
  return s;
}

template <typename T>
Var<T> Fusion<T>::forward(const Var<T>& y, bool training) {
  if (spec.parallel) {
    Var<T> out = layers[0].forward(y, training);
    for (std::size_t i = 1; i < layers.size(); ++i) out = add(out, layers[i].forward(y, training));
    return out;
  }
  Var<T> z = y;
  for (auto& layer : layers) z = spec.identity_links ? add(z, layer.forward(z, training))
                                                     : layer.forward(z, training);
  return z;
}

template <typename T>
ConvUnit<T> Builder<T>::conv(const std::string& name, int in, int out, int k, ConvGeometry g,
                             bool bias, int downsample, bool transposed) {
  const std::string full = prefix_ + name;
  Tensor<T> w(transposed ? Shape{in, out, k, k} : Shape{out, in, k, k});
  const double sd = std::sqrt(2.0 / (static_cast<double>(in) * k * k));
  for (auto& v : w.values()) v = static_cast<T>(rng_.normal(0.0, sd));
  ConvUnit<T> u;
  u.weight = params_.add_param(full + ".w", std::move(w), true);
  if (bias) u.bias = params_.add_param(full + ".b", Tensor<T>(Shape{1, out, 1, 1}), false);
  u.geom = g;
  u.transposed = transposed;
  if (info_) {
    info_->push_back(LayerInfo{full, transposed ? "deconv" : "conv", in, out, k, g.stride,
                               g.dilation, downsample, instance_,
                               static_cast<std::size_t>(in) * out * k * k + (bias ? out : 0)});
  }
  return u;
}

template <typename T>
BnUnit<T> Builder<T>::bn(const std::string& name, int channels, int downsample) {
  const std::string full = prefix_ + name;
  const Shape s{1, channels, 1, 1};
  BnUnit<T> b;
  b.gamma = params_.add_param(full + ".gamma", Tensor<T>(s, T(1)), false);
  b.beta = params_.add_param(full + ".beta", Tensor<T>(s, T(0)), false);
  b.stats.mean = params_.add_buffer(full + ".running_mean", Tensor<T>(s, T(0)));
  b.stats.var = params_.add_buffer(full + ".running_var", Tensor<T>(s, T(1)));
  if (info_) {
    info_->push_back(LayerInfo{full, "bn", channels, channels, 1, 1, 1, downsample, instance_,
                               2 * static_cast<std::size_t>(channels)});
  }
  return b;
}

template <typename T>
ConvBn<T> Builder<T>::conv_bn(const std::string& name, int in, int out, int k, ConvGeometry g,
                              bool relu, int downsample, bool transposed) {
  ConvBn<T> c;
  c.conv = conv(name + ".conv", in, out, k, g, false, downsample, transposed);
  c.bn = bn(name + ".bn", out, downsample);
  c.relu = relu;
  return c;
}

template <typename T>
Rcu<T> Builder<T>::rcu(const std::string& name, int in, int out, int stride, int downsample) {
  Rcu<T> r;
  r.first = conv_bn(name + ".a", in, out, 3, {stride, 1, 1, 0}, true, downsample);
  r.second = conv_bn(name + ".b", out, out, 3, {1, 1, 1, 0}, false, downsample);
  if (stride != 1 || in != out) {
    r.projection = conv_bn(name + ".proj", in, out, 1, {stride, 0, 1, 0}, false, downsample);
  }
  return r;
}

template <typename T>
InputInjection<T> Builder<T>::injection(const std::string& name, int channels, int pool_steps) {
  const int down = 1 << pool_steps;
  InputInjection<T> ia;
  ia.pool_steps = pool_steps;
  ia.mix = conv_bn(name + ".mix", 3, 3, 3, {1, 1, 1, 0}, true, down);
  ia.project = conv_bn(name + ".project", 3, channels, 1, {}, false, down);
  return ia;
}

template <typename T>
Fusion<T> Builder<T>::fusion(const std::string& name, FusionKind kind, int channels) {
  Fusion<T> f;
  f.spec = fusion_spec(kind);
  const int n = static_cast<int>(f.spec.layers.size());
  for (int i = 0; i < n; ++i) {
    const auto [k, r] = f.spec.layers[i];
    const ConvGeometry g{1, r * (k / 2), r, 0};
    const std::string lname = name + ".l" + std::to_string(i);
    const bool last = i == n - 1;
    if (kind == FusionKind::kOurs) {
      // The closing layer stays linear so it can lower class scores.
      f.layers.push_back(conv_bn(lname, channels, channels, k, g, !last, 1));
    } else if (kind == FusionKind::kFusionA && !last) {
      f.layers.push_back(conv_bn(lname, channels, channels, k, g, true, 1));
    } else {
      ConvBn<T> c;
      c.conv = conv(lname + ".conv", channels, channels, k, g, true, 1);
      c.relu = false;
      f.layers.push_back(std::move(c));
    }
  }
  return f;
}

#define WSSEG_INSTANTIATE(T)                                                              \
  template struct ConvUnit<T>;                                                            \
  template struct BnUnit<T>;                                                              \
  template struct ConvBn<T>;                                                              \
  template struct Rcu<T>;                                                                 \
  template struct InputInjection<T>;                                                      \
  template struct DecoderLevel<T>;                                                        \
  template struct DenseDecoder<T>;                                                        \
  template struct SparseDecoder<T>;                                                       \
  template struct Fusion<T>;                                                              \
  template class Builder<T>;                                                              \
  template std::vector<Var<T>> image_pyramid(const Var<T>&, int);                         \
  template Var<T> ia_rcu_forward(const Var<T>&, const Var<T>&, InputInjection<T>&, bool);
WSSEG_INSTANTIATE(float)
WSSEG_INSTANTIATE(double)
#undef WSSEG_INSTANTIATE

}  // namespace wsseg
