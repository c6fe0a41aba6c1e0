#include <gtest/gtest.h>

#include "wsseg/netgraph/gradcheck_suite.hpp"
#include "wsseg/netgraph/model.hpp"
#include "wsseg/netgraph/receptive_field.hpp"

using namespace wsseg;

namespace {

Tensor<double> randn(Shape s, Rng& rng) {
  Tensor<double> t(s);
  for (auto& v : t.values()) v = rng.normal();
  return t;
}

template <typename T>
void zero(ConvBn<T>& c) {
  Var<T> w = c.conv.weight;
  w.value().fill(T(0));
}

ModelConfig tiny(const std::string& preset, int resolutions) {
  ModelConfig c = model_preset(preset, resolutions);
  c.num_levels = 3;
  c.channel_scale = 1.0 / 8.0;
  c.patch_size = 32;
  c.context_border = 16;
  return c;
}

}  // namespace

TEST(Rcu, ZeroResidualGivesReluOfInput) {
  ParameterSet<double> ps;
  Rng init(1);
  Builder<double> b(ps, init, nullptr);
  auto r = b.rcu("r", 4, 4, 1, 1);
  zero(r.first);
  zero(r.second);
  Rng rng(2);
  auto x = constant(randn({2, 4, 6, 6}, rng));
  auto y = r.forward(x, true).value();
  auto want = relu(x).value();
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_EQ(y[i], want[i]);
}

TEST(Rcu, StrideTwoUsesProjection) {
  ParameterSet<float> ps;
  Rng init(1);
  Builder<float> b(ps, init, nullptr);
  auto r = b.rcu("r", 8, 16, 2, 2);
  ASSERT_TRUE(r.projection.has_value());
  auto x = constant(Tensor<float>(Shape{1, 8, 64, 64}, 0.5f));
  EXPECT_EQ(r.forward(x, true).shape(), (Shape{1, 16, 32, 32}));
  EXPECT_FALSE(b.rcu("same", 16, 16, 1, 2).projection.has_value());
}

TEST(InputInjection, ShapeZeroInitAndGradient) {
  ParameterSet<double> ps;
  Rng init(3);
  Builder<double> b(ps, init, nullptr);
  auto ia = b.injection("ia", 128, 2);
  Rng rng(4);
  auto img = constant(randn({1, 3, 256, 256}, rng));
  const auto pyr = image_pyramid(img, 2);
  EXPECT_EQ(ia.project.forward(ia.mix.forward(pyr[2], true), true).shape(),
            (Shape{1, 128, 64, 64}));

  auto small_img = constant(randn({2, 3, 16, 16}, rng));
  auto small_block = constant(randn({2, 4, 4, 4}, rng));
  ParameterSet<double> ps2;
  Builder<double> b2(ps2, init, nullptr);
  auto ia2 = b2.injection("ia", 4, 2);
  sum(mul(ia_rcu_forward(small_block, small_img, ia2, true), constant(randn({2, 4, 4, 4}, rng))))
      .backward();
  for (const auto& p : ps2.params()) {
    if (!p.name.ends_with(".w")) continue;
    double norm = 0;
    for (double g : p.var.grad().values()) norm += g * g;
    EXPECT_GT(norm, 0.0) << p.name;
  }

  zero(ia2.mix);
  zero(ia2.project);
  EXPECT_EQ(ia_rcu_forward(small_block, small_img, ia2, true).value(), small_block.value());
}

TEST(InputInjection, NonPowerOfTwoRatioIsConfigError) {
  ParameterSet<double> ps;
  Rng init(3);
  Builder<double> b(ps, init, nullptr);
  auto ia = b.injection("ia", 4, 1);
  auto img = constant(Tensor<double>(Shape{1, 3, 24, 24}));
  auto block = constant(Tensor<double>(Shape{1, 4, 8, 8}));
  EXPECT_THROW(ia_rcu_forward(block, img, ia, true), ConfigError);
  EXPECT_EQ(power_of_two_steps(256, 32), 3);
  EXPECT_THROW(power_of_two_steps(96, 32), ConfigError);
}

TEST(DenseDecoder, LinkCountsPerConnectivity) {
  EXPECT_EQ(Model<float>(model_preset("full", 1), 0).dense_links().size(), 15u);
  EXPECT_EQ(Model<float>(model_preset("residual", 1), 0).dense_links().size(), 5u);
  EXPECT_EQ(Model<float>(model_preset("plain", 1), 0).dense_links().size(), 0u);
  // Dense: level l receives every encoder level i <= l; residual only i == l.
  for (auto [i, l] : Model<float>(model_preset("full", 1), 0).dense_links()) EXPECT_LE(i, l);
  for (auto [i, l] : Model<float>(model_preset("residual", 1), 0).dense_links()) EXPECT_EQ(i, l);
}

TEST(DenseDecoder, ZeroLinksLeaveUpsamplingPath) {
  Model<double> m(tiny("full", 1), 5);
  auto& inst = m.instance(0);
  Rng rng(6);
  auto x = constant(randn({2, 3, 32, 32}, rng));
  const auto enc = inst.encode(x, true);
  auto& level = inst.dense.levels[1];  // level 2
  std::vector<std::vector<Var<double>>> pooled{{enc[0]}, {enc[1]}, {enc[2]}};
  auto prev = inst.dense.levels[2].forward(enc.back(), pooled, true);
  for (auto& [i, link] : level.links) zero(link);
  auto with_links = level.forward(prev, pooled, true).value();
  auto up_only = level.up.forward(prev, true).value();
  EXPECT_EQ(with_links, up_only);
}

TEST(SparseDecoder, StagesHaveCChannelsAndAreLinear) {
  Model<double> m(tiny("full", 1), 7);
  auto& inst = m.instance(0);
  ASSERT_TRUE(inst.sparse.has_value());
  for (const auto& p : inst.sparse->project) EXPECT_EQ(p.weight.shape().n, 8);
  for (const auto& u : inst.sparse->up) {
    EXPECT_EQ(u.weight.shape().n, 8);
    EXPECT_EQ(u.weight.shape().c, 8);
  }
  Rng rng(8);
  auto x = constant(randn({1, 3, 32, 32}, rng));
  const auto enc = inst.encode(x, true);
  EXPECT_EQ(inst.sparse->forward(enc).shape(), (Shape{1, 8, 32, 32}));
  for (auto& p : inst.sparse->project) {
    Var<double> w = p.weight;
    w.value().fill(0.0);
  }
  for (double v : inst.sparse->forward(enc).value().values()) EXPECT_EQ(v, 0.0);
}

TEST(SparseDecoder, SmallNextToDenseDecoder) {
  Model<float> m(model_preset("full", 1), 0);
  std::size_t sparse = 0, dense = 0;
  for (const auto& l : m.layers()) {
    if (l.name.find(".sparse") != std::string::npos) sparse += l.params;
    if (l.name.find(".dec") != std::string::npos) dense += l.params;
  }
  EXPECT_GT(sparse, 0u);
  EXPECT_LT(static_cast<double>(sparse), 0.05 * static_cast<double>(dense));
}

TEST(Instance, OutputMatchesInputSize) {
  for (int size : {256, 384}) {
    ModelConfig c = model_preset("full", 1);
    c.channel_scale = 1.0 / 8.0;
    Model<float> m(c, 1);
    auto x = constant(Tensor<float>(Shape{1, 3, size, size}, 0.1f));
    EXPECT_EQ(m.forward_instance(0, x, false).shape(), (Shape{1, 8, size, size}));
  }
}

TEST(Instance, IndivisibleInputIsConfigError) {
  Model<float> m(tiny("full", 1), 1);
  auto x = constant(Tensor<float>(Shape{1, 3, 36, 36}));
  EXPECT_THROW(m.forward_instance(0, x, false), ConfigError);
}

TEST(CentralCrop, ArgmaxCommutesWithCrop) {
  Rng rng(9);
  const auto y = randn({1, 5, 12, 12}, rng);
  auto argmax = [](const Tensor<double>& t) {
    std::vector<int> out;
    for (int i = 0; i < t.shape().h; ++i)
      for (int j = 0; j < t.shape().w; ++j) {
        int best = 0;
        for (int c = 1; c < t.shape().c; ++c)
          if (t(0, c, i, j) > t(0, best, i, j)) best = c;
        out.push_back(best);
      }
    return out;
  };
  const auto full = argmax(y);
  const auto cropped = argmax(central_crop(constant(y), 8, 8).value());
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) EXPECT_EQ(cropped[i * 8 + j], full[(i + 2) * 12 + j + 2]);
}

TEST(Fusion, ZeroInitOnDuplicatesGivesTwiceInput) {
  ParameterSet<double> ps;
  Rng init(1);
  Builder<double> b(ps, init, nullptr);
  auto f = b.fusion("f", FusionKind::kOurs, 3);
  for (auto& l : f.layers) zero(l);
  Rng rng(2);
  auto y = constant(randn({1, 3, 16, 16}, rng));
  auto out = f.forward(add(y, y), true).value();
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], 2 * y.value()[i]);
}

TEST(Fusion, SpecsMatchDeclaredStructure) {
  auto ours = fusion_spec(FusionKind::kOurs);
  std::vector<int> rates;
  for (auto [k, r] : ours.layers) {
    EXPECT_EQ(k, 3);
    rates.push_back(r);
  }
  EXPECT_EQ(rates, (std::vector<int>{1, 2, 4, 8, 16, 1}));
  EXPECT_TRUE(ours.identity_links);
  EXPECT_EQ(fusion_spec(FusionKind::kFusionA).layers.size(), 3u);
  EXPECT_TRUE(fusion_spec(FusionKind::kFusionB).parallel);
}

TEST(ReceptiveField, RecurrenceBaseCases) {
  EXPECT_EQ(receptive_field({{3, 1, 1}}), 3);
  EXPECT_EQ(receptive_field({{3, 1, 1}, {3, 1, 1}, {3, 1, 1}}), 7);
  EXPECT_EQ(receptive_field({{3, 2, 1}, {3, 2, 1}}), 7);
  EXPECT_EQ(receptive_field({{1, 1, 1}}), 1);
}

TEST(ReceptiveField, FusionVariantsByRecurrenceAndProbe) {
  const std::vector<std::pair<FusionKind, int>> cases{
      {FusionKind::kOurs, 65}, {FusionKind::kFusionB, 37}, {FusionKind::kFusionA, 7}};
  for (auto [kind, rf] : cases) {
    EXPECT_EQ(receptive_field(fusion_spec(kind)), rf);
    EXPECT_EQ(probe_fusion_receptive_field(kind), std::make_pair(rf, rf));
  }
}

TEST(BuildModel, ParameterRatioAndMultiResolutionIdentity) {
  const double plain = static_cast<double>(count_params(model_preset("plain", 1)));
  const double full = static_cast<double>(count_params(model_preset("full", 1)));
  EXPECT_GE(full / plain, 1.0);
  EXPECT_LE(full / plain, 1.03);
  for (const auto& name : model_preset_names()) {
    if (name.starts_with("fusion")) continue;
    Model<float> multi(model_preset(name, 2), 0);
    const std::size_t single = count_params(model_preset(name, 1));
    EXPECT_EQ(multi.param_count(), 2 * single + multi.fusion_param_count()) << name;
    EXPECT_EQ(multi.instance_param_count(0), single);
    EXPECT_LT(multi.fusion_param_count(), multi.param_count() / 100);
  }
}

TEST(BuildModel, AblationMonotonicity) {
  auto n = [](const char* p) { return count_params(model_preset(p, 1)); };
  EXPECT_LE(n("a3"), n("a1"));
  EXPECT_LE(n("a1"), n("full"));
  EXPECT_LE(n("a3"), n("a2"));
  EXPECT_LE(n("a2"), n("full"));
}

TEST(BuildModel, SameSeedSameWeights) {
  Model<float> a(tiny("full", 2), 42), b(tiny("full", 2), 42), c(tiny("full", 2), 43);
  const auto& pa = a.parameters().params();
  const auto& pb = b.parameters().params();
  ASSERT_EQ(pa.size(), pb.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i].var.value(), pb[i].var.value());
    any_diff = any_diff || !(pa[i].var.value() == c.parameters().params()[i].var.value());
  }
  EXPECT_TRUE(any_diff);
}

TEST(BuildModel, SummaryTotalsMatchParameterSet) {
  Model<float> m(model_preset("full", 2), 0);
  const std::string s = architecture_summary(m.config(), m.layers());
  EXPECT_NE(s.find("total parameters: " + std::to_string(m.param_count())), std::string::npos);
  EXPECT_NE(s.find("r1.enc1.stem.conv"), std::string::npos);
  // Context instance stem halves the 384 input.
  EXPECT_NE(s.find("64x192x192"), std::string::npos);
}

TEST(BuildModel, MultiResolutionForwardShapes) {
  Model<float> m(tiny("full", 2), 3);
  auto x = constant(Tensor<float>(Shape{2, 3, 64, 64}, 0.2f));
  EXPECT_EQ(m.forward(x, true).shape(), (Shape{2, 8, 32, 32}));
  m.set_threads(2);
  auto threaded = m.forward(x, false).value();
  m.set_threads(1);
  EXPECT_EQ(m.forward(x, false).value(), threaded);
}

TEST(ModelConfig, TextRoundTripAndValidation) {
  ModelConfig c = tiny("a2", 2);
  c.encoder_channels = {16, 32, 48};
  const ModelConfig back = ModelConfig::from_text(c.to_text());
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_THROW(ModelConfig::from_text("resolutions = 1\nfusion = ours\n"), ConfigError);
  EXPECT_THROW(ModelConfig::from_text("colour = blue\n"), ConfigError);
  EXPECT_THROW(model_preset("fusion_a", 1), ConfigError);
  const ModelConfig single = ModelConfig::from_text("resolutions = 1\nchannel_scale = 1/4\n");
  EXPECT_EQ(single.fusion, FusionKind::kNone);
  EXPECT_DOUBLE_EQ(single.channel_scale, 0.25);
  ModelConfig bad = c;
  bad.dense_decoder_channels = {16, 8, 4};
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(ModelConfig, DefaultWidthsForShallowModels) {
  ModelConfig c = model_preset("full", 1);
  EXPECT_EQ(c.encoder_widths(), (std::vector<int>{64, 64, 128, 256, 512}));
  EXPECT_EQ(c.decoder_widths(), (std::vector<int>{8, 64, 64, 128, 256}));
  c.num_levels = 3;
  c.channel_scale = 0.125;
  EXPECT_EQ(c.encoder_widths(), (std::vector<int>{8, 8, 16}));
  EXPECT_EQ(c.decoder_widths(), (std::vector<int>{8, 8, 8}));
}

TEST(GradSuite, AllChecksPass) {
  for (const auto& r : run_grad_suite()) EXPECT_TRUE(r.passed) << r.summary();
}
