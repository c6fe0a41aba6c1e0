#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "wsseg/diagnose/synth.hpp"
#include "wsseg/image/png_io.hpp"

using namespace wsseg;

namespace {

double sum(const auto& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST(Pairs, UpperTriangleIndexIsABijection) {
  int expected = 0;
  for (int a = 0; a < kTissueLabels; ++a)
    for (int b = a; b < kTissueLabels; ++b) {
      EXPECT_EQ(label_pair_index(a, b), expected);
      EXPECT_EQ(label_pair_index(b, a), expected);
      ++expected;
    }
  EXPECT_EQ(expected, kLabelPairs);
}

TEST(SuperpixelLabels, ConstantAndMajority) {
  const SuperpixelMap map = SuperpixelMap::from_ids(2, 5, {0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
  LabelMask m(2, 5, 1, 6);
  EXPECT_EQ(superpixel_labels(m, map), (std::vector<int>{6, 6}));
  m.data = {2, 2, 2, 4, 4, 4, 4, 3, 3, 3};
  EXPECT_EQ(superpixel_labels(m, map), (std::vector<int>{2, 3}));
}

TEST(SuperpixelLabels, AgreesWithBruteForceCounter) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const int h = 1 + static_cast<int>(rng.below(20)), w = 1 + static_cast<int>(rng.below(20));
    const int sps = 1 + static_cast<int>(rng.below(6));
    std::vector<int> ids(static_cast<std::size_t>(h) * w);
    for (int& v : ids) v = static_cast<int>(rng.below(sps));
    const SuperpixelMap map = SuperpixelMap::from_ids(h, w, ids);
    LabelMask mask(h, w, 1);
    for (auto& v : mask.data) v = rng.below(10) == 0 ? kIgnoreLabel : static_cast<std::uint8_t>(rng.below(8));
    const auto got = superpixel_labels(mask, map);
    for (int s = 0; s < map.count; ++s) {
      std::map<int, int> counts;
      for (std::size_t p = 0; p < map.ids.size(); ++p)
        if (map.ids[p] == s && mask.data[p] != kIgnoreLabel) ++counts[mask.data[p]];
      int want = kIgnoreLabel, best = 0;
      for (const auto& [label, n] : counts)  // ascending labels: strict > keeps the smaller on ties
        if (n > best) {
          best = n;
          want = label;
        }
      EXPECT_EQ(got[s], want);
    }
  }
}

TEST(CaseFeatures, SingleLabelImage) {
  const auto adj = grid_adjacency(3);
  const CaseFeatures f = case_features(std::vector<int>(9, 5), adj);
  for (int l = 0; l < kTissueLabels; ++l) EXPECT_EQ(f.frequency[l], l == 5 ? 1.0 : 0.0);
  EXPECT_EQ(f.cooccurrence[label_pair_index(5, 5)], 1.0);
  EXPECT_DOUBLE_EQ(sum(f.cooccurrence), 1.0);
}

TEST(CaseFeatures, CheckerboardConcentratesOnTheCrossPair) {
  // 2x2 grid: labels 1 2 / 2 1; all four edges join different labels.
  const CaseFeatures f = case_features({1, 2, 2, 1}, grid_adjacency(2));
  EXPECT_DOUBLE_EQ(f.frequency[1], 0.5);
  EXPECT_DOUBLE_EQ(f.frequency[2], 0.5);
  EXPECT_DOUBLE_EQ(f.cooccurrence[label_pair_index(1, 2)], 1.0);
  EXPECT_FALSE(f.no_edges);
}

TEST(CaseFeatures, HistogramsSumToOneAndNoEdgesIsFlagged) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = synthetic_case(Diagnosis::kDcis, 6, 0.3, rng);
    const CaseFeatures f = case_features(c.labels, grid_adjacency(6));
    EXPECT_NEAR(sum(f.frequency), 1.0, 1e-12);
    EXPECT_NEAR(sum(f.cooccurrence), 1.0, 1e-12);
    EXPECT_EQ(f.vector(FeatureVariant::kAllLabels).size(), 44u);
  }
  const CaseFeatures lone = case_features({3}, {{}});
  EXPECT_TRUE(lone.no_edges);
  EXPECT_EQ(sum(lone.cooccurrence), 0.0);
  EXPECT_THROW(case_features({}, {}), DataError);
}

TEST(CaseFeatures, InvariantToSuperpixelIdPermutation) {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int side = 5;
    const auto c = synthetic_case(Diagnosis::kAtypia, side, 0.5, rng);
    const auto adj = grid_adjacency(side);
    std::vector<int> perm(c.labels.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    rng.shuffle(perm.begin(), perm.end());
    std::vector<int> labels(perm.size());
    std::vector<std::vector<int>> padj(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) {
      labels[perm[i]] = c.labels[i];
      for (int j : adj[i]) padj[perm[i]].push_back(perm[j]);
    }
    const auto a = case_features(c.labels, adj), b = case_features(labels, padj);
    for (int k = 0; k < kLabelPairs; ++k) EXPECT_NEAR(a.cooccurrence[k], b.cooccurrence[k], 1e-15);
    EXPECT_EQ(a.frequency, b.frequency);
  }
}

TEST(CaseFeatures, NoStromaMatchesIgnoringStromaSuperpixels) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto c = synthetic_case(Diagnosis::kBenign, 6, 0.2, rng);
    const auto adj = grid_adjacency(6);
    std::vector<int> relabelled = c.labels;
    for (int& l : relabelled)
      if (is_stroma(l)) l = kIgnoreLabel;
    if (std::all_of(relabelled.begin(), relabelled.end(), [](int l) { return l == kIgnoreLabel; })) continue;
    const auto f = case_features(c.labels, adj);
    const auto g = case_features(relabelled, adj);
    for (int l = 0; l < kTissueLabels; ++l) EXPECT_NEAR(f.frequency_no_stroma[l], g.frequency[l], 1e-15);
    for (int k = 0; k < kLabelPairs; ++k) EXPECT_NEAR(f.cooccurrence_no_stroma[k], g.cooccurrence[k], 1e-15);
    EXPECT_EQ(f.frequency_no_stroma[3], 0.0);
    EXPECT_EQ(f.frequency_no_stroma[4], 0.0);
  }
}

TEST(Tasks, MappingsAreTotalAndSurjective) {
  const Diagnosis all[] = {Diagnosis::kBenign, Diagnosis::kAtypia, Diagnosis::kDcis, Diagnosis::kInvasive};
  for (const auto& task : DiagnosisTask::all()) {
    std::set<int> hit;
    for (Diagnosis d : all)
      if (auto c = task.map(d)) hit.insert(*c);
    EXPECT_EQ(static_cast<int>(hit.size()), task.classes) << task.name;
    EXPECT_EQ(DiagnosisTask::parse(task.name).id, task.id);
  }
  EXPECT_FALSE(DiagnosisTask::get(TaskId::kBenignVsRest).map(Diagnosis::kInvasive).has_value());
  EXPECT_FALSE(DiagnosisTask::get(TaskId::kAtypiaVsDcis).map(Diagnosis::kInvasive).has_value());
  EXPECT_FALSE(DiagnosisTask::get(TaskId::kAtypiaVsDcis).map(Diagnosis::kBenign).has_value());
  EXPECT_EQ(*DiagnosisTask::get(TaskId::kInvasiveVsRest).map(Diagnosis::kDcis), 0);
  EXPECT_THROW(DiagnosisTask::parse("three_class"), ConfigError);
  EXPECT_THROW(parse_diagnosis("malignant"), DataError);
}

TEST(Folds, StratifiedPartition) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> labels;
    for (int c = 0; c < 3; ++c)
      for (int i = 0, n = 10 + static_cast<int>(rng.below(15)); i < n; ++i) labels.push_back(c);
    labels.push_back(-1);
    const auto fold = stratified_folds(labels, 10, rng);
    EXPECT_EQ(fold.back(), -1);
    for (int c = 0; c < 3; ++c) {
      std::vector<int> per(10, 0);
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == c) ++per[fold[i]];
      const auto [lo, hi] = std::minmax_element(per.begin(), per.end());
      EXPECT_LE(*hi - *lo, 1);
    }
    std::vector<int> size(10, 0);
    for (int f : fold)
      if (f >= 0) ++size[f];
    const auto [lo, hi] = std::minmax_element(size.begin(), size.end());
    EXPECT_LE(*hi - *lo, 1);
  }
}

TEST(Folds, BalancingOnlyDropsFromTheGivenIndices) {
  Rng rng(10);
  const std::vector<int> labels{0, 0, 0, 0, 1, 1, 0, 1, 0};
  const std::vector<int> train{0, 1, 2, 4, 5, 6, 8};
  const auto kept = balance_classes(train, labels, 2, rng);
  EXPECT_EQ(kept.size(), 4u);
  for (int i : kept) EXPECT_TRUE(std::find(train.begin(), train.end(), i) != train.end());
  EXPECT_EQ(std::count_if(kept.begin(), kept.end(), [&](int i) { return labels[i] == 1; }), 2);
}

TEST(Mlp, LearnsXor) {
  std::vector<double> x;
  std::vector<int> y;
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const int a = static_cast<int>(rng.below(2)), b = static_cast<int>(rng.below(2));
    x.push_back(a * 2.0 - 1.0 + rng.normal(0, 0.1));
    x.push_back(b * 2.0 - 1.0 + rng.normal(0, 0.1));
    y.push_back(a ^ b);
  }
  MlpOptions o;
  o.epochs = 100;
  const Mlp m = mlp_train(x, y, 2, 2, o);
  EXPECT_EQ(m.predict(x), y);
}

TEST(Mlp, ZeroEpochsLeavesInitialWeightsAndSeedsRepeat) {
  std::vector<double> x;
  std::vector<int> y;
  Rng rng(2);
  for (int i = 0; i < 400; ++i) {
    x.push_back(rng.normal());
    x.push_back(rng.normal());
    y.push_back(static_cast<int>(rng.below(2)));
  }
  MlpOptions o;
  o.epochs = 0;
  o.seed = 5;
  Mlp untrained = mlp_train(x, y, 2, 2, o);
  Mlp fresh(2, 2, o);
  for (std::size_t i = 0; i < fresh.parameters().params().size(); ++i) {
    const auto a = untrained.parameters().params()[i].var.value().values();
    const auto b = fresh.parameters().params()[i].var.value().values();
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
  }
  const auto pred = untrained.predict(x);
  int correct = 0;
  for (std::size_t i = 0; i < y.size(); ++i) correct += pred[i] == y[i];
  EXPECT_NEAR(correct / 400.0, 0.5, 0.1);

  o.epochs = 3;
  Mlp a = mlp_train(x, y, 2, 2, o), b = mlp_train(x, y, 2, 2, o);
  for (std::size_t i = 0; i < a.parameters().params().size(); ++i) {
    const auto va = a.parameters().params()[i].var.value().values();
    const auto vb = b.parameters().params()[i].var.value().values();
    EXPECT_TRUE(std::equal(va.begin(), va.end(), vb.begin(), vb.end()));
  }
}

TEST(Mlp, NonFiniteLossIsReported) {
  std::vector<double> x{1.0, std::numeric_limits<double>::quiet_NaN(), 0.0, 1.0};
  EXPECT_THROW(mlp_train(x, {0, 1}, 2, 2, MlpOptions{}), NumericalError);
}

TEST(CrossValidate, SeparableCasesAreClassifiedPerfectly) {
  const auto cases = synthetic_cases(20, 3, FeatureVariant::kAllLabels);
  CvOptions o;
  o.repeats = 2;
  for (ClassifierKind k : {ClassifierKind::kSvm, ClassifierKind::kMlp})
    for (const auto& task : DiagnosisTask::all()) {
      const CvResult r = cross_validate(cases, task, k, o);
      EXPECT_EQ(r.mean_accuracy, 1.0) << task.name << " " << to_string(k);
      EXPECT_EQ(r.folds.size(), 20u);
    }
}

TEST(CrossValidate, ShuffledLabelsGiveChance) {
  auto cases = synthetic_cases(25, 4, FeatureVariant::kAllLabels);
  Rng rng(5);
  std::vector<Diagnosis> d;
  for (const auto& c : cases) d.push_back(c.diagnosis);
  rng.shuffle(d.begin(), d.end());
  for (std::size_t i = 0; i < cases.size(); ++i) cases[i].diagnosis = d[i];
  const CvResult r = cross_validate(cases, DiagnosisTask::get(TaskId::kAtypiaVsDcis), ClassifierKind::kSvm, CvOptions{});
  EXPECT_NEAR(r.mean_accuracy, 0.5, 0.1);
}

TEST(CrossValidate, DeterministicAndThreadIndependent) {
  const auto cases = synthetic_cases(12, 6, FeatureVariant::kNoStroma, 8, 0.3);
  CvOptions o;
  o.repeats = 4;
  const auto task = DiagnosisTask::get(TaskId::kFourClass);
  const CvResult a = cross_validate(cases, task, ClassifierKind::kSvm, o);
  o.threads = 3;
  const CvResult b = cross_validate(cases, task, ClassifierKind::kSvm, o);
  EXPECT_EQ(a.repeat_accuracy, b.repeat_accuracy);
  EXPECT_EQ(cv_results_csv(task.name, ClassifierKind::kSvm, FeatureVariant::kNoStroma, a),
            cv_results_csv(task.name, ClassifierKind::kSvm, FeatureVariant::kNoStroma, b));
}

TEST(CrossValidate, EveryCaseIsTestedOncePerRepeat) {
  const auto cases = synthetic_cases(11, 2, FeatureVariant::kAllLabels);
  CvOptions o;
  o.repeats = 3;
  const CvResult r = cross_validate(cases, DiagnosisTask::get(TaskId::kBenignVsRest), ClassifierKind::kSvm, o);
  for (int rep = 0; rep < 3; ++rep) {
    int tested = 0;
    for (const auto& f : r.folds)
      if (f.repeat == rep) tested += f.test_cases;
    EXPECT_EQ(tested, 33);  // invasive cases are excluded
  }
}

TEST(CrossValidate, TooFewCasesRejected) {
  const auto cases = synthetic_cases(5, 1, FeatureVariant::kAllLabels);
  EXPECT_THROW(cross_validate(cases, DiagnosisTask::get(TaskId::kFourClass), ClassifierKind::kSvm, CvOptions{}),
               ConfigError);
}

TEST(CrossValidate, CsvLayout) {
  CvResult r;
  r.folds = {{0, 1, 4, 0.75}};
  EXPECT_EQ(cv_results_csv("four_class", ClassifierKind::kMlp, FeatureVariant::kAllLabels, r),
            "task,classifier,features,repeat,fold,accuracy\nfour_class,mlp,all_labels,0,1,0.750000\n");
}

TEST(Manifest, LoadsCasesWithRelativePaths) {
  const auto dir = std::filesystem::temp_directory_path() / "wsseg_manifest";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir / "cases");
  LabelMask mask(2, 2, 1);
  mask.data = {1, 1, 2, 2};
  write_png(dir / "cases" / "a.png", mask);
  write_superpixels(dir / "cases" / "a.spm", SuperpixelMap::from_ids(2, 2, {0, 0, 1, 1}));
  std::ofstream(dir / "cases.csv") << "case_id,mask,superpixels,diagnosis\n"
                                   << "a,cases/a.png,cases/a.spm,dcis\n";
  const auto entries = read_case_manifest(dir / "cases.csv");
  ASSERT_EQ(entries.size(), 1u);
  EXPECT_EQ(entries[0].diagnosis, Diagnosis::kDcis);
  const auto cases = load_cases(entries, FeatureVariant::kAllLabels);
  EXPECT_DOUBLE_EQ(cases[0].features[1], 0.5);
  EXPECT_DOUBLE_EQ(cases[0].features[8 + label_pair_index(1, 2)], 1.0);
  std::ofstream(dir / "bad.csv") << "a,cases/a.png,cases/a.spm\n";
  EXPECT_THROW(read_case_manifest(dir / "bad.csv"), DataError);
  std::filesystem::remove_all(dir);
}
