#include "wsseg/netgraph/gradcheck_suite.hpp"

#include "wsseg/common/rng.hpp"
#include "wsseg/netgraph/model.hpp"

namespace wsseg {
namespace {

using V = Var<double>;

Tensor<double> randn(Shape s, Rng& rng) {
  Tensor<double> t(s);
  for (auto& v : t.values()) v = rng.normal();
  return t;
}

std::vector<NamedVar> all_params(const ParameterSet<double>& ps) {
  std::vector<NamedVar> out;
  for (const auto& p : ps.params()) out.emplace_back(p.name, p.var);
  return out;
}

// Running BN buffers drift across calls; training-mode outputs ignore them.
GradCheckReport check(const std::string& name, const std::function<V()>& fn,
                      std::vector<NamedVar> wrt, double tol) {
  GradCheckOptions o;
  o.tolerance = tol;
  auto r = grad_check(fn, wrt, o);
  r.name = name;
  return r;
}

}  // namespace

std::vector<GradCheckReport> run_grad_suite(const GradSuiteOptions& opts) {
  std::vector<GradCheckReport> out;
  Rng rng(opts.seed);
  const double tol = opts.tolerance;

  {
    V x = parameter(randn({1, 3, 8, 8}, rng));
    V w = parameter(randn({4, 3, 3, 3}, rng));
    V b = parameter(randn({1, 4, 1, 1}, rng));
    Tensor<double> pr = randn({1, 4, 4, 4}, rng);
    out.push_back(check("conv2d", [&] { return sum(mul(conv2d(x, w, b, {2, 1, 1, 0}), constant(pr))); },
                        {{"x", x}, {"w", w}, {"b", b}}, tol));
    V wd = parameter(randn({3, 3, 3, 3}, rng));
    Tensor<double> pd = randn({1, 2, 8, 8}, rng);
    Tensor<double> pdil = randn({1, 3, 8, 8}, rng);
    out.push_back(check("conv2d_dilated",
                        [&] { return sum(mul(conv2d(x, wd, V(), {1, 2, 2, 0}), constant(pdil))); },
                        {{"x", x}, {"w", wd}}, tol));
    V xt = parameter(randn({1, 4, 4, 4}, rng));
    V wt = parameter(randn({4, 2, 3, 3}, rng));
    V bt = parameter(randn({1, 2, 1, 1}, rng));
    out.push_back(check("conv_transpose2d",
                        [&] { return sum(mul(conv_transpose2d(xt, wt, bt, {2, 1, 1, 1}), constant(pd))); },
                        {{"x", xt}, {"w", wt}, {"b", bt}}, tol));
  }
  {
    V x = parameter(randn({1, 4, 8, 8}, rng));
    Tensor<double> p2 = randn({1, 4, 4, 4}, rng);
    out.push_back(check("avg_pool3x3", [&] { return sum(mul(avg_pool3x3(x, 2), constant(p2))); },
                        {{"x", x}}, tol));
    V g = parameter(randn({1, 4, 1, 1}, rng));
    V be = parameter(randn({1, 4, 1, 1}, rng));
    BatchNormStats<double> st{constant(Tensor<double>({1, 4, 1, 1}, 0.0)),
                              constant(Tensor<double>({1, 4, 1, 1}, 1.0))};
    Tensor<double> p1 = randn({1, 4, 8, 8}, rng);
    out.push_back(check("batch_norm_train",
                        [&] { return sum(mul(batch_norm(x, g, be, st, true), constant(p1))); },
                        {{"x", x}, {"gamma", g}, {"beta", be}}, tol));
    out.push_back(check("batch_norm_eval",
                        [&] { return sum(mul(batch_norm(x, g, be, st, false), constant(p1))); },
                        {{"x", x}, {"gamma", g}, {"beta", be}}, tol));
    V y = parameter(randn({1, 4, 8, 8}, rng));
    out.push_back(check("relu_add_mul",
                        [&] { return sum(mul(relu(add(x, y)), add(y, constant(p1)))); },
                        {{"x", x}, {"y", y}}, tol));
    Tensor<double> pc = randn({1, 4, 4, 6}, rng);
    out.push_back(check("central_crop", [&] { return sum(mul(central_crop(x, 4, 6), constant(pc))); },
                        {{"x", x}}, tol));
    std::vector<std::uint8_t> labels(64);
    for (auto& l : labels) l = static_cast<std::uint8_t>(rng.below(4));
    labels[3] = 255;
    const std::vector<double> cw{0.5, 2.0, 1.0, 0.0};
    out.push_back(check("softmax_cross_entropy",
                        [&] { return weighted_softmax_cross_entropy(x, labels, cw); }, {{"x", x}},
                        tol));
  }
  {
    ParameterSet<double> ps;
    Rng init(opts.seed + 1);
    Builder<double> b(ps, init, nullptr);
    auto same = b.rcu("rcu", 4, 4, 1, 1);
    auto down = b.rcu("rcu_down", 4, 4, 2, 2);
    V x = parameter(randn({1, 4, 8, 8}, rng));
    Rng pr(opts.seed + 2);
    const Tensor<double> p8 = randn({1, 4, 8, 8}, pr), p4 = randn({1, 4, 4, 4}, pr);
    auto wrt = all_params(ps);
    wrt.emplace_back("x", x);
    out.push_back(check("rcu",
                        [&] {
                          return add(sum(mul(same.forward(x, true), constant(p8))),
                                     sum(mul(down.forward(x, true), constant(p4))));
                        },
                        wrt, tol));
  }
  {
    ParameterSet<double> ps;
    Rng init(opts.seed + 3);
    Builder<double> b(ps, init, nullptr);
    auto block = b.rcu("rcu", 4, 4, 2, 2);
    auto ia = b.injection("ia", 4, 1);
    V x = parameter(randn({1, 4, 8, 8}, rng));
    V img = parameter(randn({1, 3, 8, 8}, rng));
    const Tensor<double> p = randn({1, 4, 4, 4}, rng);
    auto wrt = all_params(ps);
    wrt.emplace_back("x", x);
    wrt.emplace_back("image", img);
    out.push_back(check("ia_rcu",
                        [&] {
                          return sum(mul(ia_rcu_forward(block.forward(x, true), img, ia, true),
                                         constant(p)));
                        },
                        wrt, tol));
  }
  {
    // Two-level dense decoder: encoder widths (3, 4) at 8x8 / 4x4, widths (2, 3).
    ParameterSet<double> ps;
    Rng init(opts.seed + 4);
    Builder<double> b(ps, init, nullptr);
    DenseDecoder<double> dec;
    dec.levels.resize(2);
    dec.levels[1].level = 2;
    dec.levels[1].up = b.conv_bn("d2.up", 4, 3, 3, {1, 1, 1, 0}, true, 4, true);
    dec.levels[1].links.emplace_back(1, b.conv_bn("d2.l1", 3, 3, 1, {}, true, 4));
    dec.levels[1].links.emplace_back(2, b.conv_bn("d2.l2", 4, 3, 1, {}, true, 4));
    dec.levels[0].level = 1;
    dec.levels[0].up = b.conv_bn("d1.up", 3, 2, 3, {2, 1, 1, 1}, true, 2, true);
    dec.levels[0].links.emplace_back(1, b.conv_bn("d1.l1", 3, 2, 1, {}, true, 2));
    dec.head = b.conv("head", 2, 2, 3, {2, 1, 1, 1}, true, 1, true);
    V e1 = parameter(randn({1, 3, 8, 8}, rng));
    V e2 = parameter(randn({1, 4, 4, 4}, rng));
    const Tensor<double> p = randn({1, 2, 16, 16}, rng);
    auto wrt = all_params(ps);
    wrt.emplace_back("enc1", e1);
    wrt.emplace_back("enc2", e2);
    out.push_back(check("dense_decode",
                        [&] { return sum(mul(dec.forward({e1, e2}, true), constant(p))); }, wrt,
                        tol));

    ParameterSet<double> sps;
    Builder<double> sb(sps, init, nullptr);
    SparseDecoder<double> sparse;
    sparse.project.push_back(sb.conv("s1.p", 3, 2, 1, {}, false, 2));
    sparse.project.push_back(sb.conv("s2.p", 4, 2, 1, {}, false, 4));
    sparse.up.push_back(sb.conv("s1.up", 2, 2, 1, {2, 0, 1, 1}, false, 1, true));
    sparse.up.push_back(sb.conv("s2.up", 2, 2, 1, {2, 0, 1, 1}, false, 2, true));
    auto swrt = all_params(sps);
    swrt.emplace_back("enc1", e1);
    swrt.emplace_back("enc2", e2);
    out.push_back(check("sparse_decode",
                        [&] { return sum(mul(sparse.forward({e1, e2}), constant(p))); }, swrt,
                        tol));
  }
  for (FusionKind kind : {FusionKind::kOurs, FusionKind::kFusionA, FusionKind::kFusionB}) {
    ParameterSet<double> ps;
    Rng init(opts.seed + 5);
    Builder<double> b(ps, init, nullptr);
    auto f = b.fusion("fusion", kind, 3);
    V y = parameter(randn({1, 3, 8, 8}, rng));
    const Tensor<double> p = randn({1, 3, 8, 8}, rng);
    auto wrt = all_params(ps);
    wrt.emplace_back("y", y);
    out.push_back(check("fusion_" + to_string(kind),
                        [&] { return sum(mul(f.forward(y, true), constant(p))); }, wrt, tol));
  }
  if (opts.include_model) {
    ModelConfig cfg = model_preset("full", 1);
    cfg.num_levels = 3;
    cfg.channel_scale = 1.0 / 8.0;
    cfg.patch_size = 16;
    Model<double> m(cfg, opts.seed + 6);
    V x = constant(randn({2, 3, 16, 16}, rng));
    std::vector<std::uint8_t> labels(2 * 16 * 16);
    for (auto& l : labels) l = static_cast<std::uint8_t>(rng.below(8));
    const std::vector<double> cw(8, 1.0);
    out.push_back(check("model_L3",
                        [&] { return weighted_softmax_cross_entropy(m.forward(x, true), labels, cw); },
                        all_params(m.parameters()), tol));
  }
  return out;
}

}  // namespace wsseg
