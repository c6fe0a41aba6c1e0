#include <gtest/gtest.h>

#include <algorithm>
#include <complex>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "wsseg/common/error.hpp"
#include "wsseg/tensor/ops.hpp"
#include "wsseg/trainer/train.hpp"

using namespace wsseg;

namespace {

ModelConfig small_model(int patch = 32) {
  ModelConfig c = model_preset("full", 1);
  c.num_levels = 3;
  c.channel_scale = 1.0 / 8.0;
  c.patch_size = patch;
  return c;
}

std::map<int, long> histogram(const LabelMask& m) {
  std::map<int, long> h;
  for (auto v : m.data) ++h[v];
  return h;
}

Sample random_sample(Rng& rng, int image_size, int mask_size) {
  Sample s{Image(image_size, image_size, 3), LabelMask(mask_size, mask_size, 1)};
  for (auto& v : s.image.data) v = static_cast<std::uint8_t>(rng.below(256));
  for (auto& v : s.mask.data) v = static_cast<std::uint8_t>(rng.below(5));
  return s;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(ClassWeights, HandExamples) {
  auto w = class_weights_from_counts({900, 100});
  EXPECT_NEAR(w[0], 1000.0 / 1800.0, 1e-12);
  EXPECT_NEAR(w[1], 5.0, 1e-12);
  for (double v : class_weights_from_counts({7, 7, 7, 7})) EXPECT_DOUBLE_EQ(v, 1.0);
  auto absent = class_weights_from_counts({30, 0, 10});
  EXPECT_DOUBLE_EQ(absent[0], 40.0 / 90.0);
  EXPECT_DOUBLE_EQ(absent[1], 0.0);
  EXPECT_DOUBLE_EQ(absent[2], 40.0 / 30.0);
}

TEST(ClassWeights, IgnoredPixelsSkippedAndAllIgnoredRejected) {
  LabelMask m(2, 2, 1);
  m.data = {0, 1, 1, kIgnoreLabel};
  auto w = class_weights({&m}, 2);
  EXPECT_DOUBLE_EQ(w[0], 1.5);
  EXPECT_DOUBLE_EQ(w[1], 0.75);
  LabelMask ignored(2, 2, 1);
  ignored.data = {kIgnoreLabel, kIgnoreLabel, kIgnoreLabel, kIgnoreLabel};
  EXPECT_THROW(class_weights({&ignored}, 2), DataError);
}

TEST(ClassWeights, WeightedCountsSumToTotal) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int C = 1 + static_cast<int>(rng.below(8));
    std::vector<std::uint64_t> counts(C);
    std::uint64_t total = 0;
    for (auto& n : counts) total += (n = 1 + rng.below(100000));
    const auto w = class_weights_from_counts(counts);
    double s = 0;
    for (int c = 0; c < C; ++c) s += w[c] * static_cast<double>(counts[c]);
    EXPECT_NEAR(s, static_cast<double>(total), 1e-9 * total);
  }
}

TEST(Augment, QuarterTurnMatchesHandExample) {
  Sample s{Image(2, 2, 3), LabelMask(2, 2, 1)};
  s.mask.data = {1, 2, 3, 4};
  Transform t;
  t.quarter_turns = 1;
  // Counter-clockwise: the right column becomes the top row.
  EXPECT_EQ(apply_transform(s, t).mask.data, (std::vector<std::uint8_t>{2, 4, 1, 3}));
  t.quarter_turns = 0;
  t.hflip = true;
  EXPECT_EQ(apply_transform(s, t).mask.data, (std::vector<std::uint8_t>{2, 1, 4, 3}));
}

TEST(Augment, IdentityAndInvolutions) {
  Rng rng(3);
  const Sample s = random_sample(rng, 12, 12);
  EXPECT_EQ(apply_transform(s, Transform{}).mask, s.mask);
  Transform half;
  half.quarter_turns = 2;
  const Sample twice = apply_transform(apply_transform(s, half), half);
  EXPECT_EQ(twice.image, s.image);
  EXPECT_EQ(twice.mask, s.mask);
  Transform quarter;
  quarter.quarter_turns = 1;
  Sample four = s;
  for (int i = 0; i < 4; ++i) four = apply_transform(four, quarter);
  EXPECT_EQ(four.image, s.image);
  Transform flip;
  flip.hflip = true;
  EXPECT_EQ(apply_transform(apply_transform(s, flip), flip).mask, s.mask);
}

TEST(Augment, RandomTransformsPreserveLabels) {
  Rng rng(11);
  AugmentOptions opts;
  opts.crop_size = 10;
  for (int trial = 0; trial < 100; ++trial) {
    const Sample s = random_sample(rng, 16, 16);
    const Transform t = random_transform(rng, 16, true, opts);
    EXPECT_FALSE(t.is_identity());
    const Sample a = apply_transform(s, t, opts.crop_size);
    ASSERT_EQ(a.mask.height, 16);
    ASSERT_EQ(a.image.height, 16);
    const auto before = histogram(s.mask);
    const auto after = histogram(a.mask);
    if (!t.crop) {
      EXPECT_EQ(before, after);
    } else {
      for (const auto& [label, n] : after) EXPECT_TRUE(before.count(label)) << label;
    }
  }
}

TEST(Augment, CropKeepsWindowCentred) {
  Rng rng(4);
  const Sample s = random_sample(rng, 16, 16);
  Transform t;
  t.crop = true;
  t.crop_row = 5;
  t.crop_col = 1;
  const Sample a = apply_transform(s, t, 10);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c) {
      EXPECT_EQ(a.mask.at(r + 3, c + 3), s.mask.at(r + 5, c + 1));
      EXPECT_EQ(a.image.at(r + 3, c + 3, 2), s.image.at(r + 5, c + 1, 2));
    }
  // Symmetric extension: the row above the window mirrors its first row.
  EXPECT_EQ(a.mask.at(2, 5), a.mask.at(3, 5));
}

TEST(Augment, ContextImageStaysAlignedWithMask) {
  Rng rng(8);
  AugmentOptions opts;
  for (int trial = 0; trial < 20; ++trial) {
    Sample s = random_sample(rng, 20, 12);
    // Inner 12x12 of the image encodes the mask in the red channel.
    for (int r = 0; r < 12; ++r)
      for (int c = 0; c < 12; ++c) s.image.at(r + 4, c + 4, 0) = s.mask.at(r, c);
    const Transform t = random_transform(rng, 12, false, opts);
    EXPECT_FALSE(t.crop);
    const Sample a = apply_transform(s, t);
    for (int r = 0; r < 12; ++r)
      for (int c = 0; c < 12; ++c) ASSERT_EQ(a.image.at(r + 4, c + 4, 0), a.mask.at(r, c));
  }
}

TEST(Augment, PlanHasMultiplicityWithIdentityFirst) {
  Rng rng(2);
  const Sample s = random_sample(rng, 16, 16);
  AugmentOptions opts;
  opts.crop_size = 8;
  const auto plan = plan_augmentation(s, rng, opts);
  ASSERT_EQ(plan.size(), 5u);
  EXPECT_TRUE(plan[0].is_identity());
  for (std::size_t i = 1; i < plan.size(); ++i) EXPECT_FALSE(plan[i].is_identity());
}

TEST(Sgd, ZeroGradientLeavesParamsUnchanged) {
  ParameterSet<double> ps;
  Var<double> p = ps.add_param("p.w", Tensor<double>(Shape{1, 1, 1, 3}, 2.0), true);
  Sgd<double> sgd(ps, {0.1, 0.9, 0.0});
  sgd.step();
  for (double v : p.value().values()) EXPECT_EQ(v, 2.0);
}

TEST(Sgd, QuadraticWithoutMomentumContractsGeometrically) {
  ParameterSet<double> ps;
  Var<double> x = ps.add_param("x.w", Tensor<double>(Shape{1, 1, 1, 1}, 3.0), true);
  Sgd<double> sgd(ps, {0.1, 0.0, 0.0});
  for (int k = 1; k <= 50; ++k) {
    ps.zero_grad();
    scale(mul(x, x), 0.5).backward();
    sgd.step();
    EXPECT_NEAR(x.value()[0], 3.0 * std::pow(0.9, k), 1e-12);
  }
}

TEST(Sgd, MomentumMatchesLinearRecurrenceSolution) {
  const double lr = 0.1, m = 0.9, x0 = 1.5;
  // x_{k+1} = (1 + m - lr) x_k - m x_{k-1}, x_1 = (1 - lr) x_0.
  const std::complex<double> b = 1 + m - lr;
  const std::complex<double> disc = std::sqrt(b * b - 4.0 * m);
  const std::complex<double> r1 = (b + disc) / 2.0, r2 = (b - disc) / 2.0;
  const double x1 = (1 - lr) * x0;
  const std::complex<double> a2 = (x1 - r1 * x0) / (r2 - r1), a1 = x0 - a2;

  ParameterSet<double> ps;
  Var<double> x = ps.add_param("x.w", Tensor<double>(Shape{1, 1, 1, 1}, x0), true);
  Sgd<double> sgd(ps, {lr, m, 0.0});
  for (int k = 1; k <= 60; ++k) {
    ps.zero_grad();
    scale(mul(x, x), 0.5).backward();
    sgd.step();
    const std::complex<double> want = a1 * std::pow(r1, k) + a2 * std::pow(r2, k);
    EXPECT_NEAR(x.value()[0], want.real(), 1e-10) << k;
  }
}

TEST(Sgd, WeightDecayOnlyWhereFlagged) {
  ParameterSet<double> ps;
  Var<double> w = ps.add_param("c.w", Tensor<double>(Shape{1, 1, 1, 1}, 2.0), true);
  Var<double> g = ps.add_param("bn.gamma", Tensor<double>(Shape{1, 1, 1, 1}, 2.0), false);
  Sgd<double> sgd(ps, {0.5, 0.0, 0.1});
  sgd.step();
  EXPECT_DOUBLE_EQ(w.value()[0], 2.0 - 0.5 * 0.1 * 2.0);
  EXPECT_DOUBLE_EQ(g.value()[0], 2.0);
}

TEST(Sgd, ModelExemptsNormalizationAndBiasFromDecay) {
  Model<float> model(small_model(), 1);
  int decayed = 0;
  for (const auto& p : model.parameters().params()) {
    const bool exempt = p.name.ends_with(".b") || p.name.ends_with(".gamma") || p.name.ends_with(".beta");
    EXPECT_EQ(p.decay, !exempt) << p.name;
    decayed += p.decay;
  }
  EXPECT_GT(decayed, 0);
}

TEST(Sgd, SmallStepDecreasesLossOnFrozenBatch) {
  const ModelConfig mc = small_model();
  Model<double> model(mc, 3);
  const auto data = synth_dataset(2, 32, 8, 5);
  std::vector<const Image*> imgs{&data[0].image, &data[1].image};
  std::vector<const LabelMask*> masks{&data[0].mask, &data[1].mask};
  const Tensor<float> xf = images_to_tensor(imgs);
  Tensor<double> x(xf.shape());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = xf[i];
  const auto labels = masks_to_labels(masks);
  const auto w = class_weights(data, 8);
  auto loss = [&] {
    return weighted_softmax_cross_entropy(model.forward(Var<double>(x), true),
                                          std::span<const std::uint8_t>(labels),
                                          std::span<const double>(w));
  };
  Sgd<double> sgd(model.parameters(), {1e-5, 0.0, 0.0});
  for (int k = 0; k < 3; ++k) {
    model.parameters().zero_grad();
    const Var<double> before = loss();
    before.backward();
    sgd.step();
    EXPECT_LT(loss().value()[0], before.value()[0]);
  }
}

TEST(TrainConfig, TextRoundTripAndValidation) {
  TrainConfig c;
  c.batch_size = 3;
  c.learning_rate = 0.01;
  c.allow_crop = false;
  const TrainConfig back = TrainConfig::from_text(c.to_text());
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_THROW(TrainConfig::from_text("validation_fraction = 1.0"), ConfigError);
  EXPECT_THROW(TrainConfig::from_text("batch_size = 0"), ConfigError);
  EXPECT_THROW(TrainConfig::from_text("learning_rte = 0.1"), ConfigError);
}

TEST(SynthDataset, LabelsInRangeAndSeeded) {
  const auto a = synth_dataset(3, 64, 5, 9);
  const auto b = synth_dataset(3, 64, 5, 9);
  const auto c = synth_dataset(3, 64, 5, 10);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].image, b[i].image);
    EXPECT_EQ(a[i].mask, b[i].mask);
    for (auto v : a[i].mask.data) EXPECT_LT(v, 5);
  }
  EXPECT_NE(a[0].image, c[0].image);
  EXPECT_THROW(synth_dataset(1, 8, 9, 1), ConfigError);
}

TEST(SynthDataset, ClassFrequenciesAreImbalanced) {
  std::vector<std::uint64_t> counts(8, 0);
  for (const auto& s : synth_dataset(40, 128, 8, 2))
    for (auto v : s.mask.data) ++counts[v];
  EXPECT_GT(counts[0], 3 * counts[7]);
  for (auto n : counts) EXPECT_GT(n, 0u);
}

// A single-feature multiway stump (thresholds at midpoints between class
// means of block-mean red) must separate classes on held-out images.
TEST(SynthDataset, MeanColourStumpSeparatesClasses) {
  struct Block {
    double red;
    int label;
  };
  auto blocks = [](const std::vector<Sample>& data) {
    std::vector<Block> out;
    for (const auto& s : data)
      for (int r = 0; r + 8 <= s.mask.height; r += 8)
        for (int c = 0; c + 8 <= s.mask.width; c += 8) {
          const int label = s.mask.at(r, c);
          bool pure = true;
          double red = 0;
          for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) {
              pure &= s.mask.at(r + i, c + j) == label;
              red += s.image.at(r + i, c + j, 0);
            }
          if (pure) out.push_back({red / 64.0, label});
        }
    return out;
  };
  const auto train = blocks(synth_dataset(30, 128, 8, 21));
  const auto test = blocks(synth_dataset(30, 128, 8, 22));
  std::vector<double> sum(8, 0.0), n(8, 0.0);
  for (const auto& b : train) {
    sum[b.label] += b.red;
    n[b.label] += 1;
  }
  std::vector<std::pair<double, int>> means;
  for (int c = 0; c < 8; ++c)
    if (n[c] > 0) means.push_back({sum[c] / n[c], c});
  std::sort(means.begin(), means.end());
  int correct = 0;
  for (const auto& b : test) {
    std::size_t k = 0;
    while (k + 1 < means.size() && b.red > 0.5 * (means[k].first + means[k + 1].first)) ++k;
    correct += means[k].second == b.label;
  }
  ASSERT_GT(test.size(), 100u);
  EXPECT_GT(static_cast<double>(correct) / test.size(), 0.9);
}

TEST(SynthDataset, SaveLoadRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "wsseg_synth_rt";
  std::filesystem::remove_all(dir);
  const auto data = synth_dataset(3, 32, 4, 1);
  save_dataset(dir, data);
  const auto back = load_dataset(dir);
  ASSERT_EQ(back.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back[i].image, data[i].image);
    EXPECT_EQ(back[i].mask, data[i].mask);
  }
  std::filesystem::remove_all(dir);
  EXPECT_THROW(load_dataset(dir), DataError);
}

TEST(Data, SplitIsSeededAndDisjoint) {
  const auto [tr, va] = split_indices(50, 0.1, 4);
  EXPECT_EQ(va.size(), 5u);
  EXPECT_EQ(tr.size(), 45u);
  std::vector<int> all(tr);
  all.insert(all.end(), va.begin(), va.end());
  std::sort(all.begin(), all.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(all[i], i);
  EXPECT_EQ(split_indices(50, 0.1, 4), split_indices(50, 0.1, 4));
}

TEST(Data, ImageScaling) {
  Image img(1, 2, 3);
  img.data = {128, 0, 255, 192, 64, 128};
  const auto t = images_to_tensor({&img});
  EXPECT_EQ(t.shape(), (Shape{1, 3, 1, 2}));
  EXPECT_FLOAT_EQ(t(0, 0, 0, 0), 0.0f);
  EXPECT_FLOAT_EQ(t(0, 1, 0, 0), -2.0f);
  EXPECT_FLOAT_EQ(t(0, 2, 0, 0), 127.0f / 64.0f);
  EXPECT_FLOAT_EQ(t(0, 0, 0, 1), 1.0f);
}

TEST(Train, ZeroLearningRateKeepsLossConstant) {
  Model<float> model(small_model(), 2);
  const auto data = synth_dataset(2, 32, 8, 6);
  TrainConfig tc;
  tc.learning_rate = 0.0;
  tc.batch_size = 2;
  tc.max_steps = 6;
  tc.augment_multiplicity = 1;
  const auto r = train(model, data, {}, tc);
  ASSERT_EQ(r.losses.size(), 6u);
  for (double l : r.losses) EXPECT_NEAR(l, r.losses[0], 1e-5 * r.losses[0]);
}

TEST(Train, SameSeedGivesIdenticalRunsAndCheckpoints) {
  const auto dir = std::filesystem::temp_directory_path() / "wsseg_train_det";
  std::filesystem::create_directories(dir);
  const auto data = synth_dataset(6, 32, 8, 3);
  std::vector<TrainResult> runs;
  std::vector<std::string> logs;
  for (int run = 0; run < 2; ++run) {
    Model<float> model(small_model(), 5);
    TrainConfig tc;
    tc.batch_size = 2;
    tc.max_steps = 8;
    tc.validate_every = 4;
    std::ostringstream log;
    runs.push_back(train(model, data, tc, {&log, dir / ("ckpt" + std::to_string(run))}));
    logs.push_back(log.str());
  }
  EXPECT_EQ(runs[0].losses, runs[1].losses);
  EXPECT_EQ(logs[0], logs[1]);
  EXPECT_EQ(read_bytes(dir / "ckpt0"), read_bytes(dir / "ckpt1"));
  EXPECT_NE(logs[0].find("step=4 loss="), std::string::npos);
  EXPECT_NE(logs[0].find("val_miou="), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Train, CheckpointRoundTripIsBitExact) {
  const auto path = std::filesystem::temp_directory_path() / "wsseg_ckpt_rt.wsg";
  const auto data = synth_dataset(4, 32, 8, 8);
  Model<float> trained(small_model(), 1);
  TrainConfig tc;
  tc.batch_size = 2;
  tc.max_steps = 5;
  train(trained, data, {}, tc, {nullptr, path});
  Model<float> fresh(small_model(), 99);
  load_checkpoint(path, fresh);
  std::vector<const Image*> imgs{&data[0].image, &data[1].image};
  const Tensor<float> x = images_to_tensor(imgs);
  const auto a = trained.forward(Var<float>(x), false).value();
  const auto b = fresh.forward(Var<float>(x), false).value();
  EXPECT_TRUE(std::ranges::equal(a.values(), b.values()));
  std::filesystem::remove(path);
}

TEST(Train, NonFiniteLossNamesTheStep) {
  Model<float> model(small_model(), 1);
  Var<float> w = model.parameters().params()[0].var;
  w.value()[0] = std::numeric_limits<float>::quiet_NaN();
  const auto data = synth_dataset(2, 32, 8, 1);
  TrainConfig tc;
  tc.batch_size = 2;
  tc.max_steps = 3;
  try {
    train(model, data, {}, tc);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("step 1 (batch 0"), std::string::npos) << e.what();
  }
}

TEST(Train, RejectsMismatchedGeometry) {
  Model<float> model(small_model(), 1);
  const auto data = synth_dataset(2, 64, 8, 1);
  EXPECT_THROW(train(model, data, {}, TrainConfig{}), DataError);
}

TEST(Train, OverfitsFixedBatch) {
  const ModelConfig mc = small_model(64);
  Model<float> model(mc, 4);
  const auto data = synth_dataset(4, 64, 8, 12);
  TrainConfig tc;
  tc.batch_size = 4;
  tc.max_steps = 400;
  tc.validate_every = 400;
  tc.augment_multiplicity = 1;
  tc.learning_rate = 0.01;
  const auto r = train(model, data, data, tc);
  EXPECT_GE(r.validations.back().scores.pa, 0.95);
  EXPECT_LT(r.losses.back(), r.losses.front());
}
