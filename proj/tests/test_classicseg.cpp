#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "wsseg/classicseg/baseline.hpp"
#include "wsseg/common/rng.hpp"

using namespace wsseg;

namespace {

Image uniform_image(int h, int w, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  Image img(h, w, 3);
  for (std::size_t p = 0; p < img.pixels(); ++p) {
    img.data[3 * p] = r;
    img.data[3 * p + 1] = g;
    img.data[3 * p + 2] = b;
  }
  return img;
}

Image random_image(Rng& rng, int h, int w) {
  Image img(h, w, 3);
  // Smooth-ish content: a few random blobs over noise.
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < 3; ++ch) {
        const double v = 128 + 60 * std::sin(r * 0.05 * (ch + 1)) * std::cos(c * 0.07) + rng.normal(0, 20);
        img.at(r, c, ch) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
  return img;
}

// Histogram block boundaries within one region block.
const int kHistStarts[] = {0, 32, 64, 96, 352, 608};

}  // namespace

TEST(Lab, ReferenceColours) {
  const Vec3 black = rgb_to_lab(0, 0, 0);
  EXPECT_NEAR(black[0], 0.0, 1e-9);
  EXPECT_NEAR(black[1], 0.0, 1e-9);
  const Vec3 white = rgb_to_lab(255, 255, 255);
  EXPECT_NEAR(white[0], 100.0, 1e-4);
  EXPECT_NEAR(white[1], 0.0, 1e-3);
  EXPECT_NEAR(white[2], 0.0, 1e-3);
  // Published sRGB red: L*a*b* (53.24, 80.09, 67.20).
  const Vec3 red = rgb_to_lab(255, 0, 0);
  EXPECT_NEAR(red[0], 53.24, 0.01);
  EXPECT_NEAR(red[1], 80.09, 0.01);
  EXPECT_NEAR(red[2], 67.20, 0.01);
}

TEST(Lab, MidGrayFollowsLightnessFormula) {
  const double lin = std::pow((119.0 / 255.0 + 0.055) / 1.055, 2.4);
  const double L = 116.0 * std::cbrt(lin) - 16.0;
  const Vec3 gray = rgb_to_lab(119, 119, 119);
  EXPECT_NEAR(gray[0], L, 1e-4);
  EXPECT_NEAR(gray[1], 0.0, 1e-3);
  EXPECT_NEAR(gray[2], 0.0, 1e-3);
}

TEST(Stains, WhiteHasNoStain) {
  const Vec3 od = optical_density(255, 255, 255);
  for (double v : od) EXPECT_DOUBLE_EQ(v, 0.0);
  const StainImages s = color_deconvolution(uniform_image(2, 2, 255, 255, 255));
  for (double v : s.hematoxylin.data) EXPECT_NEAR(v, 0.0, 1e-12);
  for (double v : s.eosin.data) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Stains, MatrixRowsUnitAndResidualOrthogonal) {
  const StainMatrix m = StainMatrix::hematoxylin_eosin();
  for (const auto& row : m.rows) EXPECT_NEAR(row[0] * row[0] + row[1] * row[1] + row[2] * row[2], 1.0, 1e-12);
  for (int i = 0; i < 2; ++i) {
    double dot = 0;
    for (int k = 0; k < 3; ++k) dot += m.rows[i][k] * m.rows[2][k];
    EXPECT_NEAR(dot, 0.0, 1e-12);
  }
}

TEST(Stains, SynthesizedHematoxylinIsRecovered) {
  const StainMatrix m = StainMatrix::hematoxylin_eosin();
  const Vec3 c = unmix_stains(m.rows[0], m);
  EXPECT_NEAR(c[0], 1.0, 1e-6);
  EXPECT_NEAR(c[1], 0.0, 1e-6);
  EXPECT_NEAR(c[2], 0.0, 1e-6);
}

TEST(Stains, RoundTripReconstructsOpticalDensity) {
  const StainMatrix m = StainMatrix::hematoxylin_eosin();
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto r = static_cast<std::uint8_t>(rng.below(256));
    const auto g = static_cast<std::uint8_t>(rng.below(256));
    const auto b = static_cast<std::uint8_t>(rng.below(256));
    const Vec3 od = optical_density(r, g, b);
    const Vec3 back = remix_stains(unmix_stains(od, m), m);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(back[k], od[k], 1e-6);
  }
}

TEST(Stains, SingularMatrixRejectedAndNegativesClamped) {
  StainMatrix bad;
  bad.rows = {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{1, 1, 0}};
  EXPECT_THROW(unmix_stains({0.1, 0.2, 0.3}, bad), ConfigError);
  EXPECT_THROW(StainMatrix::from_stains({1, 2, 3}, {2, 4, 6}), ConfigError);
  Rng rng(9);
  const StainImages s = color_deconvolution(random_image(rng, 20, 20));
  for (double v : s.hematoxylin.data) EXPECT_GE(v, 0.0);
  for (double v : s.eosin.data) EXPECT_GE(v, 0.0);
}

TEST(Lbp, ConstantImageIsAllOnes) {
  const RealRaster flat(6, 7, 1, 3.5);
  for (auto code : lbp_map(flat).data) EXPECT_EQ(code, 255);
}

TEST(Lbp, SingleDarkPixelClearsOneBitPerNeighbour) {
  RealRaster field(5, 5, 1, 1.0);
  field.at(2, 2) = 0.0;
  const auto codes = lbp_map(field);
  // Neighbour bit order: TL T TR R BR B BL L. Each neighbour sees the dark
  // pixel in the opposite direction.
  const int want[3][3] = {{255 - 16, 255 - 32, 255 - 64},
                          {255 - 8, 255, 255 - 128},
                          {255 - 4, 255 - 2, 255 - 1}};
  for (int dr = 0; dr < 3; ++dr)
    for (int dc = 0; dc < 3; ++dc) EXPECT_EQ(codes.at(1 + dr, 1 + dc), want[dr][dc]) << dr << "," << dc;
  RealRaster bright(5, 5, 1, 0.0);
  bright.at(2, 2) = 1.0;
  EXPECT_EQ(lbp_map(bright).at(2, 2), 0);
}

TEST(Lbp, InvariantUnderMonotoneMaps) {
  Rng rng(17);
  RealRaster x(16, 16, 1);
  for (auto& v : x.data) v = std::floor(rng.uniform(0, 10));  // ties included
  const auto base = lbp_map(x);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = rng.uniform(0.1, 3), b = rng.uniform(-5, 5), e = rng.uniform(0.5, 2);
    RealRaster y = x;
    for (auto& v : y.data) v = a * std::pow(v + 1.0, e) + b + std::atan(v);
    EXPECT_EQ(lbp_map(y), base) << trial;
  }
}

TEST(Slic, UniformImageGivesRegularAreas) {
  const Image img = uniform_image(220, 275, 180, 120, 160);
  const SuperpixelMap map = slic(img);
  EXPECT_TRUE(is_connected_partition(map));
  EXPECT_EQ(map.count, 20);
  for (int s : map.sizes) {
    EXPECT_GE(s, 1500);
    EXPECT_LE(s, 4500);
  }
}

TEST(Slic, HalfSplitImageRespectsTheEdge) {
  Image img = uniform_image(120, 160, 200, 80, 80);
  for (int r = 0; r < 120; ++r)
    for (int c = 80; c < 160; ++c) {
      img.at(r, c, 0) = 60;
      img.at(r, c, 1) = 60;
      img.at(r, c, 2) = 200;
    }
  const SuperpixelMap map = slic(img, {1000.0, 10.0, 10});
  // Boundary recall: every edge pixel pair has a superpixel boundary within 1 px.
  int hit = 0;
  for (int r = 0; r < 120; ++r) {
    bool near = false;
    for (int c = 78; c <= 80; ++c) near |= map.at(r, c) != map.at(r, c + 1);
    hit += near;
  }
  EXPECT_GT(hit / 120.0, 0.95);
  // No superpixel holds both colours.
  for (int s = 0; s < map.count; ++s) {
    std::set<int> sides;
    for (int r = 0; r < 120; ++r)
      for (int c = 0; c < 160; ++c)
        if (map.at(r, c) == s) sides.insert(c >= 80);
    EXPECT_EQ(sides.size(), 1u) << s;
  }
}

TEST(Slic, RandomImagesGiveConnectedPartitions) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 60 + static_cast<int>(rng.below(140)), w = 60 + static_cast<int>(rng.below(140));
    const SuperpixelMap map = slic(random_image(rng, h, w), {1000.0, 10.0, 10});
    ASSERT_TRUE(is_connected_partition(map)) << trial;
    long total = 0;
    for (int s : map.sizes) total += s;
    EXPECT_EQ(total, static_cast<long>(h) * w);
    const double mean = static_cast<double>(total) / map.count;
    EXPECT_GT(mean, 500.0);
    EXPECT_LT(mean, 1500.0);
  }
}

TEST(Slic, RejectsDegenerateImages) {
  EXPECT_THROW(slic(uniform_image(1, 1, 0, 0, 0)), DataError);
  EXPECT_THROW(slic(uniform_image(10, 10, 0, 0, 0)), DataError);
}

TEST(Connectivity, RandomLabelMapsBecomeConnectedPartitions) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = 1 + static_cast<int>(rng.below(15)), w = 1 + static_cast<int>(rng.below(15));
    std::vector<int> ids(static_cast<std::size_t>(h) * w);
    for (int& v : ids) v = static_cast<int>(rng.below(4));
    const SuperpixelMap m = enforce_connectivity(h, w, ids, 1 + static_cast<int>(rng.below(6)));
    ASSERT_TRUE(is_connected_partition(m)) << trial;
  }
}

TEST(Connectivity, DetectsSplitRegion) {
  SuperpixelMap m = SuperpixelMap::from_ids(1, 3, {0, 1, 0});
  EXPECT_FALSE(is_connected_partition(m));
  EXPECT_EQ(m.adjacency[0], std::vector<int>{1});
}

TEST(Slic, SuperpixelFileRoundTrip) {
  Rng rng(1);
  const SuperpixelMap map = slic(random_image(rng, 80, 90), {800.0, 10.0, 5});
  const auto path = std::filesystem::temp_directory_path() / "wsseg_sp.spm";
  write_superpixels(path, map);
  const SuperpixelMap back = read_superpixels(path);
  EXPECT_EQ(back.ids, map.ids);
  EXPECT_EQ(back.count, map.count);
  std::filesystem::remove(path);
}

TEST(Features, LayoutNormalizationAndDeterminism) {
  Rng rng(5);
  const Image img = random_image(rng, 100, 120);
  const SuperpixelMap map = slic(img, {1000.0, 10.0, 10});
  const FeatureMatrix f = image_features(img, map, {20.0, 40.0});
  EXPECT_EQ(f.dims, 1824);
  EXPECT_EQ(f.rows, map.count);
  for (int i = 0; i < f.rows; ++i)
    for (int block = 0; block < 3; ++block)
      for (int k = 0; k < 5; ++k) {
        double s = 0;
        for (int j = kHistStarts[k]; j < kHistStarts[k + 1]; ++j) s += f.row(i)[block * kBlockDims + j];
        EXPECT_TRUE(std::abs(s - 1.0) < 1e-5 || s == 0.0) << i << " " << block << " " << k << " " << s;
      }
  EXPECT_EQ(image_features(img, map, {20.0, 40.0}).data, f.data);
}

TEST(Features, UniformImageGivesIdenticalBlocks) {
  const Image img = uniform_image(90, 90, 150, 100, 170);
  const SuperpixelMap map = slic(img, {900.0, 10.0, 10});
  const FeatureMatrix f = image_features(img, map, {20.0, 40.0});
  for (int i = 0; i < f.rows; ++i)
    for (int j = 0; j < kBlockDims; ++j) {
      EXPECT_EQ(f.row(i)[j], f.row(i)[kBlockDims + j]);
      EXPECT_EQ(f.row(i)[j], f.row(i)[2 * kBlockDims + j]);
    }
}

TEST(Features, InnerRingInsideSuperpixelIsEmpty) {
  const Image img = uniform_image(40, 40, 150, 100, 170);
  const SuperpixelMap map = SuperpixelMap::from_ids(40, 40, std::vector<int>(1600, 0));
  const FeatureMatrix f = image_features(img, map, {5.0, 10.0});
  for (int j = 0; j < kBlockDims; ++j) EXPECT_EQ(f.row(0)[kBlockDims + j], 0.0f);
  double outer = 0;
  for (int j = 0; j < kBlockDims; ++j) outer += f.row(0)[2 * kBlockDims + j];
  EXPECT_NEAR(outer, 5.0, 1e-5);
  EXPECT_THROW(image_features(img, map, {10.0, 5.0}), ConfigError);
}

TEST(Features, DumpRoundTrip) {
  Rng rng(6);
  const Image img = random_image(rng, 60, 60);
  const SuperpixelMap map = slic(img, {600.0, 10.0, 5});
  const FeatureMatrix f = image_features(img, map, {15.0, 30.0});
  const auto path = std::filesystem::temp_directory_path() / "wsseg_features.bin";
  write_feature_dump(path, f);
  const FeatureMatrix back = read_feature_dump(path);
  EXPECT_EQ(back.rows, f.rows);
  EXPECT_EQ(back.dims, f.dims);
  EXPECT_EQ(back.data, f.data);
  EXPECT_TRUE(std::filesystem::exists(path.string() + ".txt"));
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".txt");
}

namespace {

FeatureMatrix blobs(Rng& rng, int n, std::vector<int>& labels) {
  FeatureMatrix x;
  x.dims = 2;
  for (int i = 0; i < n; ++i) {
    const int y = i % 2;
    x.data.push_back(static_cast<float>((y ? 2.0 : -2.0) + rng.normal(0, 0.4)));
    x.data.push_back(static_cast<float>((y ? 1.0 : -1.0) + rng.normal(0, 0.4)));
    labels.push_back(y);
    ++x.rows;
  }
  return x;
}

}  // namespace

TEST(Svm, SeparableBlobsAreFitExactly) {
  Rng rng(1);
  std::vector<int> labels;
  const FeatureMatrix x = blobs(rng, 200, labels);
  const LinearSvm svm = linear_svm_train(x, labels, 2, {1e-3, 30, 4});
  EXPECT_EQ(svm.predict(x), labels);
}

TEST(Svm, DuplicatedDataGivesSameMargins) {
  Rng rng(2);
  std::vector<int> labels, held_labels;
  const FeatureMatrix x = blobs(rng, 100, labels);
  const FeatureMatrix held = blobs(rng, 50, held_labels);
  FeatureMatrix twice = x;
  twice.data.insert(twice.data.end(), x.data.begin(), x.data.end());
  twice.rows *= 2;
  std::vector<int> twice_labels = labels;
  twice_labels.insert(twice_labels.end(), labels.begin(), labels.end());
  // Same number of steps: half the epochs over twice the rows.
  const LinearSvm a = linear_svm_train(x, labels, 2, {0.1, 4000, 7});
  const LinearSvm b = linear_svm_train(twice, twice_labels, 2, {0.1, 2000, 7});
  for (int i = 0; i < held.rows; ++i)
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(a.margin(c, held.row(i)), b.margin(c, held.row(i)), 1e-3);
}

TEST(Svm, SingleClassRejectedAndArchiveRoundTrip) {
  FeatureMatrix x;
  x.rows = 2;
  x.dims = 1;
  x.data = {1.0f, 2.0f};
  EXPECT_THROW(linear_svm_train(x, {1, 1}, 3), ConfigError);
  Rng rng(3);
  std::vector<int> labels;
  const FeatureMatrix b = blobs(rng, 40, labels);
  const LinearSvm svm = linear_svm_train(b, labels, 2);
  const LinearSvm back = LinearSvm::from_archive(decode_archive(encode_archive(svm.to_archive())));
  EXPECT_EQ(back.weights, svm.weights);
  EXPECT_EQ(back.predict(b), svm.predict(b));
}

TEST(Baseline, MajorityLabels) {
  const SuperpixelMap map = SuperpixelMap::from_ids(2, 3, {0, 0, 1, 0, 1, 2});
  LabelMask m(2, 3, 1);
  m.data = {3, 3, 1, 2, 2, kIgnoreLabel};
  EXPECT_EQ(majority_labels(map, m, 4), (std::vector<int>{3, 1, kIgnoreLabel}));
}

TEST(Baseline, PerLabelCapLimitsTrainingRows) {
  const auto data = synth_dataset(2, 128, 8, 4);
  BaselineOptions opts;
  opts.slic.target_area = 300;
  opts.per_label_cap = 3;
  const SuperpixelTable t = build_superpixel_table(data, opts);
  std::vector<int> count(8, 0);
  for (int l : t.labels) ++count[l];
  for (int c : count) EXPECT_LE(c, 6);
  EXPECT_EQ(t.features.rows, static_cast<int>(t.labels.size()));
}

TEST(Baseline, BeatsChanceOnSyntheticTissue) {
  const auto train = synth_dataset(16, 256, 8, 31);
  const auto test = synth_dataset(8, 256, 8, 32);
  BaselineOptions opts;
  const LinearSvm svm = baseline_train(train, opts);
  const BaselineEvaluation e = evaluate_baseline(test, svm, opts);
  EXPECT_GE(e.superpixel_accuracy, 4.0 / 8.0);
}
