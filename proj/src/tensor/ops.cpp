#include "wsseg/tensor/ops.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

#include "wsseg/tensor/conv_kernels.hpp"

namespace wsseg {

template <typename T>
void Var<T>::backward() const {
  if (!node_) throw UsageError("backward() on an undefined Var");
  if (node_->value.size() != 1) {
    throw UsageError("backward() requires a scalar, got shape " + node_->value.shape().str());
  }
  // Iterative post-order DFS gives a topological order (inputs first).
  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{node_.get(), 0}};
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->inputs.size()) {
      Node<T>* child = n->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.push_back({child, 0});
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  for (Node<T>* n : order) {
    if (!n->is_leaf()) n->ensure_grad().fill(T(0));
  }
  node_->ensure_grad()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (!(*it)->is_leaf()) (*it)->backward(**it);
  }
}

template class Var<float>;
template class Var<double>;

namespace {

void check_geometry(const ConvGeometry& g, const char* op) {
  if (g.stride < 1) throw ConfigError(std::string(op) + ": stride must be >= 1");
  if (g.dilation < 1) throw ConfigError(std::string(op) + ": dilation must be >= 1");
  if (g.padding < 0) throw ConfigError(std::string(op) + ": padding must be >= 0");
}

template <typename T>
void check_bias(const Var<T>& bias, int channels, const char* op) {
  if (!bias.defined()) return;
  if (bias.shape() != Shape{1, channels, 1, 1}) {
    throw ConfigError(std::string(op) + ": bias shape " + bias.shape().str() +
                      " does not match out_channels " + std::to_string(channels));
  }
}

template <typename T>
void add_bias(Tensor<T>& y, const Tensor<T>& b) {
  const auto& s = y.shape();
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      T* p = y.data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
      const T v = b[c];
      for (std::size_t i = 0; i < plane; ++i) p[i] += v;
    }
}

template <typename T>
void bias_grad(const Tensor<T>& dy, Tensor<T>& db) {
  const auto& s = dy.shape();
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const T* p = dy.data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
      T acc = 0;
      for (std::size_t i = 0; i < plane; ++i) acc += p[i];
      db[c] += acc;
    }
}

template <typename T>
std::vector<Var<T>> with_optional(std::initializer_list<Var<T>> required, const Var<T>& opt) {
  std::vector<Var<T>> v(required);
  if (opt.defined()) v.push_back(opt);
  return v;
}

}  // namespace

int conv_out_size(int in, int kernel, const ConvGeometry& g) {
  const int span = in + 2 * g.padding - g.dilation * (kernel - 1) - 1;
  if (span < 0) return 0;
  return span / g.stride + 1;
}

int conv_transpose_out_size(int in, int kernel, const ConvGeometry& g) {
  return (in - 1) * g.stride - 2 * g.padding + g.dilation * (kernel - 1) + 1 + g.output_padding;
}

template <typename T>
Var<T> conv2d(const Var<T>& input, const Var<T>& weight, const Var<T>& bias,
              const ConvGeometry& g, ConvAlgorithm algo) {
  check_geometry(g, "conv2d");
  const Shape xs = input.shape();
  const Shape ws = weight.shape();
  if (ws.h != ws.w) throw ConfigError("conv2d: kernel must be square, got " + ws.str());
  if (xs.c != ws.c) {
    throw ConfigError("conv2d: input channels " + std::to_string(xs.c) +
                      " != kernel in_channels " + std::to_string(ws.c));
  }
  check_bias(bias, ws.n, "conv2d");
  const int ho = conv_out_size(xs.h, ws.h, g);
  const int wo = conv_out_size(xs.w, ws.w, g);
  if (ho < 1) throw ConfigError("conv2d: output height < 1 for input height " + std::to_string(xs.h));
  if (wo < 1) throw ConfigError("conv2d: output width < 1 for input width " + std::to_string(xs.w));

  const kernels::ConvProblem p{xs.n, xs.c, xs.h, xs.w, ws.n, ho, wo, ws.h, g.stride, g.padding,
                               g.dilation};
  Tensor<T> y(Shape{xs.n, ws.n, ho, wo});
  kernels::conv_forward(p, input.value().data(), weight.value().data(), y.data(), algo);
  const bool has_bias = bias.defined();
  if (has_bias) add_bias(y, bias.value());

  return Var<T>::make(std::move(y), with_optional({input, weight}, bias),
                      [p, algo, has_bias](Node<T>& self) {
                        Node<T>& in = *self.inputs[0];
                        Node<T>& w = *self.inputs[1];
                        if (in.requires_grad)
                          kernels::conv_backward_data(p, self.grad.data(), w.value.data(),
                                                      in.ensure_grad().data(), algo);
                        if (w.requires_grad)
                          kernels::conv_backward_weight(p, in.value.data(), self.grad.data(),
                                                        w.ensure_grad().data(), algo);
                        if (has_bias && self.inputs[2]->requires_grad)
                          bias_grad(self.grad, self.inputs[2]->ensure_grad());
                      });
}

template <typename T>
Var<T> conv_transpose2d(const Var<T>& input, const Var<T>& weight, const Var<T>& bias,
                        const ConvGeometry& g, ConvAlgorithm algo) {
  check_geometry(g, "conv_transpose2d");
  if (g.output_padding < 0 || g.output_padding >= g.stride) {
    throw ConfigError("conv_transpose2d: output_padding " + std::to_string(g.output_padding) +
                      " must satisfy 0 <= output_padding < stride " + std::to_string(g.stride));
  }
  const Shape xs = input.shape();
  const Shape ws = weight.shape();
  if (ws.h != ws.w) throw ConfigError("conv_transpose2d: kernel must be square, got " + ws.str());
  if (xs.c != ws.n) {
    throw ConfigError("conv_transpose2d: input channels " + std::to_string(xs.c) +
                      " != kernel in_channels " + std::to_string(ws.n));
  }
  check_bias(bias, ws.c, "conv_transpose2d");
  const int ho = conv_transpose_out_size(xs.h, ws.h, g);
  const int wo = conv_transpose_out_size(xs.w, ws.w, g);
  if (ho < 1 || wo < 1) throw ConfigError("conv_transpose2d: output size < 1");

  // Expressed as the adjoint of a forward conv whose input is our output.
  const kernels::ConvProblem p{xs.n, ws.c, ho, wo, xs.c, xs.h, xs.w, ws.h, g.stride, g.padding,
                               g.dilation};
  Tensor<T> y(Shape{xs.n, ws.c, ho, wo});
  kernels::conv_backward_data(p, input.value().data(), weight.value().data(), y.data(), algo);
  const bool has_bias = bias.defined();
  if (has_bias) add_bias(y, bias.value());

  return Var<T>::make(std::move(y), with_optional({input, weight}, bias),
                      [p, algo, has_bias](Node<T>& self) {
                        Node<T>& in = *self.inputs[0];
                        Node<T>& w = *self.inputs[1];
                        if (in.requires_grad) {
                          Tensor<T> tmp(in.value.shape());
                          kernels::conv_forward(p, self.grad.data(), w.value.data(), tmp.data(),
                                                algo);
                          auto& dx = in.ensure_grad();
                          for (std::size_t i = 0; i < tmp.size(); ++i) dx[i] += tmp[i];
                        }
                        if (w.requires_grad)
                          kernels::conv_backward_weight(p, self.grad.data(), in.value.data(),
                                                        w.ensure_grad().data(), algo);
                        if (has_bias && self.inputs[2]->requires_grad)
                          bias_grad(self.grad, self.inputs[2]->ensure_grad());
                      });
}

template <typename T>
Var<T> avg_pool3x3(const Var<T>& input, int stride) {
  if (stride < 1) throw ConfigError("avg_pool3x3: stride must be >= 1");
  const Shape s = input.shape();
  const ConvGeometry g{stride, 1, 1, 0};
  const int ho = conv_out_size(s.h, 3, g);
  const int wo = conv_out_size(s.w, 3, g);
  if (ho < 1 || wo < 1) throw ConfigError("avg_pool3x3: output size < 1 for " + s.str());
  Tensor<T> y(Shape{s.n, s.c, ho, wo});
  const Tensor<T>& x = input.value();
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int oh = 0; oh < ho; ++oh) {
        const int h0 = std::max(oh * stride - 1, 0);
        const int h1 = std::min(oh * stride + 1, s.h - 1);
        for (int ow = 0; ow < wo; ++ow) {
          const int w0 = std::max(ow * stride - 1, 0);
          const int w1 = std::min(ow * stride + 1, s.w - 1);
          T acc = 0;
          for (int h = h0; h <= h1; ++h)
            for (int w = w0; w <= w1; ++w) acc += x(n, c, h, w);
          y(n, c, oh, ow) = acc / static_cast<T>((h1 - h0 + 1) * (w1 - w0 + 1));
        }
      }
  return Var<T>::make(std::move(y), {input}, [stride](Node<T>& self) {
    Node<T>& in = *self.inputs[0];
    auto& dx = in.ensure_grad();
    const Shape s = in.value.shape();
    const Shape os = self.value.shape();
    for (int n = 0; n < s.n; ++n)
      for (int c = 0; c < s.c; ++c)
        for (int oh = 0; oh < os.h; ++oh) {
          const int h0 = std::max(oh * stride - 1, 0);
          const int h1 = std::min(oh * stride + 1, s.h - 1);
          for (int ow = 0; ow < os.w; ++ow) {
            const int w0 = std::max(ow * stride - 1, 0);
            const int w1 = std::min(ow * stride + 1, s.w - 1);
            const T g = self.grad(n, c, oh, ow) / static_cast<T>((h1 - h0 + 1) * (w1 - w0 + 1));
            for (int h = h0; h <= h1; ++h)
              for (int w = w0; w <= w1; ++w) dx(n, c, h, w) += g;
          }
        }
  });
}

template <typename T>
Var<T> batch_norm(const Var<T>& input, const Var<T>& gamma, const Var<T>& beta,
                  BatchNormStats<T>& stats, bool training) {
  const Shape s = input.shape();
  const Shape cs{1, s.c, 1, 1};
  if (gamma.shape() != cs || beta.shape() != cs) {
    throw ConfigError("batch_norm: gamma/beta shape must be " + cs.str() + " for input " + s.str());
  }
  if (stats.mean.shape() != cs || stats.var.shape() != cs) {
    throw ConfigError("batch_norm: running statistics do not match channels " +
                      std::to_string(s.c));
  }
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  const std::size_t m = plane * s.n;
  const Tensor<T>& x = input.value();
  Tensor<T> y(s);
  Tensor<T> xhat(s);
  std::vector<T> inv_std(s.c);
  for (int c = 0; c < s.c; ++c) {
    double mean;
    double var;
    if (training) {
      double acc = 0;
      for (int n = 0; n < s.n; ++n) {
        const T* p = x.data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) acc += p[i];
      }
      mean = acc / static_cast<double>(m);
      double sq = 0;
      for (int n = 0; n < s.n; ++n) {
        const T* p = x.data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          const double d = p[i] - mean;
          sq += d * d;
        }
      }
      var = sq / static_cast<double>(m);
      const double unbiased = m > 1 ? sq / static_cast<double>(m - 1) : var;
      T& rm = stats.mean.value()[c];
      T& rv = stats.var.value()[c];
      rm = static_cast<T>((1.0 - kBatchNormMomentum) * rm + kBatchNormMomentum * mean);
      rv = static_cast<T>((1.0 - kBatchNormMomentum) * rv + kBatchNormMomentum * unbiased);
    } else {
      mean = stats.mean.value()[c];
      var = stats.var.value()[c];
    }
    const double is = 1.0 / std::sqrt(var + kBatchNormEps);
    inv_std[c] = static_cast<T>(is);
    const T g = gamma.value()[c];
    const T b = beta.value()[c];
    for (int n = 0; n < s.n; ++n) {
      const std::size_t base = (static_cast<std::size_t>(n) * s.c + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        const T xh = static_cast<T>((x[base + i] - mean) * is);
        xhat[base + i] = xh;
        y[base + i] = g * xh + b;
      }
    }
  }
  return Var<T>::make(
      std::move(y), {input, gamma, beta},
      [xhat = std::move(xhat), inv_std = std::move(inv_std), training](Node<T>& self) {
        Node<T>& in = *self.inputs[0];
        Node<T>& ga = *self.inputs[1];
        Node<T>& be = *self.inputs[2];
        const Shape s = in.value.shape();
        const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
        const double m = static_cast<double>(plane * s.n);
        const Tensor<T>& dy = self.grad;
        for (int c = 0; c < s.c; ++c) {
          double sum_dy = 0;
          double sum_dy_xhat = 0;
          for (int n = 0; n < s.n; ++n) {
            const std::size_t base = (static_cast<std::size_t>(n) * s.c + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
              sum_dy += dy[base + i];
              sum_dy_xhat += static_cast<double>(dy[base + i]) * xhat[base + i];
            }
          }
          if (ga.requires_grad) ga.ensure_grad()[c] += static_cast<T>(sum_dy_xhat);
          if (be.requires_grad) be.ensure_grad()[c] += static_cast<T>(sum_dy);
          if (!in.requires_grad) continue;
          auto& dx = in.ensure_grad();
          const double g = ga.value[c];
          const double is = inv_std[c];
          for (int n = 0; n < s.n; ++n) {
            const std::size_t base = (static_cast<std::size_t>(n) * s.c + c) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
              double d;
              if (training) {
                d = g * is * (dy[base + i] - sum_dy / m - xhat[base + i] * sum_dy_xhat / m);
              } else {
                d = g * is * dy[base + i];
              }
              dx[base + i] += static_cast<T>(d);
            }
          }
        }
      });
}

template <typename T>
Var<T> relu(const Var<T>& input) {
  Tensor<T> y = input.value();
  for (auto& v : y.values()) v = v < T(0) ? T(0) : v;  // NaN passes through
  return Var<T>::make(std::move(y), {input}, [](Node<T>& self) {
    Node<T>& in = *self.inputs[0];
    auto& dx = in.ensure_grad();
    for (std::size_t i = 0; i < dx.size(); ++i) {
      if (in.value[i] > T(0)) dx[i] += self.grad[i];
    }
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  if (a.shape() != b.shape()) {
    throw ConfigError("add: shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  }
  Tensor<T> y = a.value();
  const Tensor<T>& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  return Var<T>::make(std::move(y), {a, b}, [](Node<T>& self) {
    for (auto& in : self.inputs) {
      if (!in->requires_grad) continue;
      auto& d = in->ensure_grad();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i];
    }
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  if (a.shape() != b.shape()) {
    throw ConfigError("mul: shape mismatch " + a.shape().str() + " vs " + b.shape().str());
  }
  Tensor<T> y = a.value();
  const Tensor<T>& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  return Var<T>::make(std::move(y), {a, b}, [](Node<T>& self) {
    Node<T>& x = *self.inputs[0];
    Node<T>& z = *self.inputs[1];
    if (x.requires_grad) {
      auto& d = x.ensure_grad();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i] * z.value[i];
    }
    if (z.requires_grad) {
      auto& d = z.ensure_grad();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i] * x.value[i];
    }
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T factor) {
  Tensor<T> y = a.value();
  for (auto& v : y.values()) v *= factor;
  return Var<T>::make(std::move(y), {a}, [factor](Node<T>& self) {
    auto& d = self.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += factor * self.grad[i];
  });
}

template <typename T>
Var<T> sum(const Var<T>& a) {
  T acc = 0;
  for (T v : a.value().values()) acc += v;
  return Var<T>::make(Tensor<T>(Shape{1, 1, 1, 1}, acc), {a}, [](Node<T>& self) {
    auto& d = self.inputs[0]->ensure_grad();
    const T g = self.grad[0];
    for (auto& v : d.values()) v += g;
  });
}

template <typename T>
Var<T> central_crop(const Var<T>& input, int h, int w) {
  const Shape s = input.shape();
  if (h < 1 || w < 1 || h > s.h || w > s.w) {
    throw ConfigError("central_crop: target " + std::to_string(h) + "x" + std::to_string(w) +
                      " does not fit source " + std::to_string(s.h) + "x" + std::to_string(s.w));
  }
  if ((s.h - h) % 2 != 0 || (s.w - w) % 2 != 0) {
    throw ConfigError("central_crop: source minus target must be even on both axes");
  }
  const int oh = (s.h - h) / 2;
  const int ow = (s.w - w) / 2;
  Tensor<T> y(Shape{s.n, s.c, h, w});
  const Tensor<T>& x = input.value();
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int i = 0; i < h; ++i) {
        const T* src = &x(n, c, i + oh, ow);
        std::copy(src, src + w, &y(n, c, i, 0));
      }
  return Var<T>::make(std::move(y), {input}, [oh, ow](Node<T>& self) {
    auto& dx = self.inputs[0]->ensure_grad();
    const Shape ys = self.value.shape();
    for (int n = 0; n < ys.n; ++n)
      for (int c = 0; c < ys.c; ++c)
        for (int i = 0; i < ys.h; ++i)
          for (int j = 0; j < ys.w; ++j) dx(n, c, i + oh, j + ow) += self.grad(n, c, i, j);
  });
}

template <typename T>
Var<T> weighted_softmax_cross_entropy(const Var<T>& logits, std::span<const std::uint8_t> target,
                                      std::span<const double> class_weights,
                                      std::optional<int> ignore_index) {
  const Shape s = logits.shape();
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  if (target.size() != plane * s.n) {
    throw ConfigError("softmax_cross_entropy: target has " + std::to_string(target.size()) +
                      " labels, logits need " + std::to_string(plane * s.n));
  }
  if (class_weights.size() != static_cast<std::size_t>(s.c)) {
    throw ConfigError("softmax_cross_entropy: " + std::to_string(class_weights.size()) +
                      " class weights for " + std::to_string(s.c) + " classes");
  }
  for (double w : class_weights) {
    if (!(w >= 0.0)) throw ConfigError("softmax_cross_entropy: class weights must be >= 0");
  }
  const Tensor<T>& z = logits.value();
  Tensor<T> probs(s);
  std::size_t counted = 0;
  double total = 0;
  std::vector<double> e(s.c);
  for (int n = 0; n < s.n; ++n)
    for (std::size_t px = 0; px < plane; ++px) {
      const int t = target[n * plane + px];
      const bool ignored = ignore_index && t == *ignore_index;
      if (!ignored && t >= s.c) {
        throw DataError("softmax_cross_entropy: label " + std::to_string(t) + " at (n=" +
                        std::to_string(n) + ", y=" + std::to_string(px / s.w) + ", x=" +
                        std::to_string(px % s.w) + ") is outside 0.." + std::to_string(s.c - 1));
      }
      const std::size_t base = static_cast<std::size_t>(n) * s.c * plane + px;
      double mx = z[base];
      for (int c = 1; c < s.c; ++c) mx = std::max<double>(mx, z[base + c * plane]);
      double denom = 0;
      for (int c = 0; c < s.c; ++c) {
        e[c] = std::exp(static_cast<double>(z[base + c * plane]) - mx);
        denom += e[c];
      }
      for (int c = 0; c < s.c; ++c) probs[base + c * plane] = static_cast<T>(e[c] / denom);
      if (ignored) continue;
      ++counted;
      const double logp = static_cast<double>(z[base + t * plane]) - mx - std::log(denom);
      total += class_weights[t] * -logp;
    }
  const double loss = counted ? total / static_cast<double>(counted) : 0.0;
  std::vector<std::uint8_t> labels(target.begin(), target.end());
  std::vector<double> weights(class_weights.begin(), class_weights.end());
  return Var<T>::make(
      Tensor<T>(Shape{1, 1, 1, 1}, static_cast<T>(loss)), {logits},
      [probs = std::move(probs), labels = std::move(labels), weights = std::move(weights),
       ignore_index, counted](Node<T>& self) {
        if (counted == 0) return;
        auto& dz = self.inputs[0]->ensure_grad();
        const Shape s = dz.shape();
        const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
        const double g = static_cast<double>(self.grad[0]) / static_cast<double>(counted);
        for (int n = 0; n < s.n; ++n)
          for (std::size_t px = 0; px < plane; ++px) {
            const int t = labels[n * plane + px];
            if (ignore_index && t == *ignore_index) continue;
            const double wg = weights[t] * g;
            if (wg == 0.0) continue;
            const std::size_t base = static_cast<std::size_t>(n) * s.c * plane + px;
            for (int c = 0; c < s.c; ++c) {
              const double p = probs[base + c * plane];
              dz[base + c * plane] += static_cast<T>(wg * (p - (c == t ? 1.0 : 0.0)));
            }
          }
      });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  const Shape s = logits.shape();
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  Tensor<T> out(s);
  for (int n = 0; n < s.n; ++n)
    for (std::size_t px = 0; px < plane; ++px) {
      const std::size_t base = static_cast<std::size_t>(n) * s.c * plane + px;
      double mx = logits[base];
      for (int c = 1; c < s.c; ++c) mx = std::max<double>(mx, logits[base + c * plane]);
      double denom = 0;
      for (int c = 0; c < s.c; ++c) denom += std::exp(logits[base + c * plane] - mx);
      for (int c = 0; c < s.c; ++c)
        out[base + c * plane] = static_cast<T>(std::exp(logits[base + c * plane] - mx) / denom);
    }
  return out;
}

#define WSSEG_INSTANTIATE(T)                                                                    \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, const ConvGeometry&,     \
                         ConvAlgorithm);                                                       \
  template Var<T> conv_transpose2d(const Var<T>&, const Var<T>&, const Var<T>&,                \
                                   const ConvGeometry&, ConvAlgorithm);                        \
  template Var<T> avg_pool3x3(const Var<T>&, int);                                             \
  template Var<T> batch_norm(const Var<T>&, const Var<T>&, const Var<T>&, BatchNormStats<T>&,  \
                             bool);                                                            \
  template Var<T> relu(const Var<T>&);                                                         \
  template Var<T> add(const Var<T>&, const Var<T>&);                                           \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                           \
  template Var<T> scale(const Var<T>&, T);                                                     \
  template Var<T> sum(const Var<T>&);                                                          \
  template Var<T> central_crop(const Var<T>&, int, int);                                       \
  template Var<T> weighted_softmax_cross_entropy(const Var<T>&, std::span<const std::uint8_t>, \
                                                 std::span<const double>, std::optional<int>); \
  template Tensor<T> softmax(const Tensor<T>&);
WSSEG_INSTANTIATE(float)
WSSEG_INSTANTIATE(double)
#undef WSSEG_INSTANTIATE

}  // namespace wsseg
