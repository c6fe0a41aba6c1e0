#include "wsseg/netgraph/receptive_field.hpp"

#include <algorithm>

namespace wsseg {

int receptive_field(const std::vector<RfLayer>& chain) {
  int rf = 1;
  int jump = 1;
  for (const auto& l : chain) {
    rf += (l.kernel - 1) * l.dilation * jump;
    jump *= l.stride;
  }
  return rf;
}

int receptive_field(const FusionSpec& spec) {
  std::vector<RfLayer> chain;
  for (auto [k, r] : spec.layers) chain.push_back({k, 1, r});
  if (!spec.parallel) return receptive_field(chain);
  int widest = 1;
  for (const auto& l : chain) widest = std::max(widest, receptive_field({l}));
  return widest;
}

std::pair<int, int> probe_receptive_field(
    const std::function<Var<double>(const Var<double>&)>& net, ParameterSet<double>& params,
    Shape input) {
  for (auto& p : params.params()) {
    Var<double> v = p.var;
    const bool is_gamma = p.name.ends_with(".gamma");
    const bool is_beta_or_bias = p.name.ends_with(".beta") || p.name.ends_with(".b");
    v.value().fill(is_gamma ? 1.0 : is_beta_or_bias ? 0.0 : 0.01);
  }
  for (auto& [name, b] : params.buffers()) {
    Var<double> v = b;
    v.value().fill(name.ends_with(".running_var") ? 1.0 : 0.0);
  }
  Var<double> x = parameter(Tensor<double>(input, 1.0));
  Var<double> y = net(x);
  Tensor<double> mask(y.shape());
  const int cy = y.shape().h / 2;
  const int cx = y.shape().w / 2;
  for (int c = 0; c < y.shape().c; ++c) mask(0, c, cy, cx) = 1.0;
  sum(mul(y, constant(std::move(mask)))).backward();

  int r0 = input.h, r1 = -1, c0 = input.w, c1 = -1;
  const Tensor<double>& g = x.grad();
  for (int c = 0; c < input.c; ++c)
    for (int i = 0; i < input.h; ++i)
      for (int j = 0; j < input.w; ++j) {
        if (g(0, c, i, j) == 0.0) continue;
        r0 = std::min(r0, i);
        r1 = std::max(r1, i);
        c0 = std::min(c0, j);
        c1 = std::max(c1, j);
      }
  if (r1 < 0) return {0, 0};
  return {r1 - r0 + 1, c1 - c0 + 1};
}

std::pair<int, int> probe_fusion_receptive_field(FusionKind kind) {
  const int rf = receptive_field(fusion_spec(kind));
  const int side = rf + 16;  // margin keeps the field off the border
  ParameterSet<double> params;
  Rng rng(0);
  Builder<double> b(params, rng, nullptr);
  Fusion<double> f = b.fusion("fusion", kind, 2);
  return probe_receptive_field([&](const Var<double>& x) { return f.forward(x, false); }, params,
                               Shape{1, 2, side, side});
}

}  // namespace wsseg
