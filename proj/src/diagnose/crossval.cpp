#include "wsseg/diagnose/crossval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "wsseg/image/png_io.hpp"

namespace wsseg {

std::string to_string(Diagnosis d) {
  switch (d) {
    case Diagnosis::kBenign: return "benign";
    case Diagnosis::kAtypia: return "atypia";
    case Diagnosis::kDcis: return "dcis";
    case Diagnosis::kInvasive: return "invasive";
  }
  return "?";
}

Diagnosis parse_diagnosis(const std::string& s) {
  for (Diagnosis d : {Diagnosis::kBenign, Diagnosis::kAtypia, Diagnosis::kDcis, Diagnosis::kInvasive})
    if (to_string(d) == s) return d;
  throw DataError("unknown diagnosis '" + s + "' (benign, atypia, dcis, invasive)");
}

std::optional<int> DiagnosisTask::map(Diagnosis d) const {
  switch (id) {
    case TaskId::kFourClass:
      return static_cast<int>(d);
    case TaskId::kInvasiveVsRest:
      return d == Diagnosis::kInvasive ? 1 : 0;
    case TaskId::kBenignVsRest:
      if (d == Diagnosis::kInvasive) return std::nullopt;
      return d == Diagnosis::kBenign ? 0 : 1;
    case TaskId::kAtypiaVsDcis:
      if (d == Diagnosis::kAtypia) return 0;
      if (d == Diagnosis::kDcis) return 1;
      return std::nullopt;
  }
  return std::nullopt;
}

DiagnosisTask DiagnosisTask::get(TaskId id) {
  switch (id) {
    case TaskId::kFourClass: return {id, "four_class", 4};
    case TaskId::kInvasiveVsRest: return {id, "invasive_vs_rest", 2};
    case TaskId::kBenignVsRest: return {id, "benign_vs_rest", 2};
    case TaskId::kAtypiaVsDcis: return {id, "atypia_vs_dcis", 2};
  }
  throw ConfigError("unknown task id");
}

std::vector<DiagnosisTask> DiagnosisTask::all() {
  return {get(TaskId::kFourClass), get(TaskId::kInvasiveVsRest), get(TaskId::kBenignVsRest),
          get(TaskId::kAtypiaVsDcis)};
}

DiagnosisTask DiagnosisTask::parse(const std::string& name) {
  for (const auto& t : all())
    if (t.name == name) return t;
  throw ConfigError("unknown task '" + name + "' (four_class, invasive_vs_rest, benign_vs_rest, atypia_vs_dcis)");
}

std::string to_string(ClassifierKind k) { return k == ClassifierKind::kSvm ? "svm" : "mlp"; }

ClassifierKind parse_classifier(const std::string& s) {
  if (s == "svm") return ClassifierKind::kSvm;
  if (s == "mlp") return ClassifierKind::kMlp;
  throw ConfigError("unknown classifier '" + s + "' (svm, mlp)");
}

std::vector<int> stratified_folds(const std::vector<int>& task_labels, int folds, Rng& rng) {
  int classes = 0;
  for (int l : task_labels) classes = std::max(classes, l + 1);
  std::vector<int> fold(task_labels.size(), -1);
  int next = 0;
  for (int c = 0; c < classes; ++c) {
    std::vector<int> members;
    for (std::size_t i = 0; i < task_labels.size(); ++i)
      if (task_labels[i] == c) members.push_back(static_cast<int>(i));
    rng.shuffle(members.begin(), members.end());
    // Continue the round robin across classes so fold sizes stay within one.
    for (int i : members) {
      fold[i] = next;
      next = (next + 1) % folds;
    }
  }
  return fold;
}

std::vector<int> balance_classes(const std::vector<int>& indices, const std::vector<int>& task_labels,
                                 int classes, Rng& rng) {
  std::vector<std::vector<int>> by_class(classes);
  for (int i : indices) by_class[task_labels[i]].push_back(i);
  std::size_t smallest = indices.size();
  for (const auto& v : by_class)
    if (!v.empty()) smallest = std::min(smallest, v.size());
  std::vector<int> out;
  for (auto& v : by_class) {
    rng.shuffle(v.begin(), v.end());
    out.insert(out.end(), v.begin(), v.begin() + static_cast<std::ptrdiff_t>(std::min(smallest, v.size())));
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

struct Standardizer {
  std::vector<double> mean, scale;

  Standardizer(const std::vector<DiagnosisCase>& cases, const std::vector<int>& rows, int dims)
      : mean(dims, 0.0), scale(dims, 1.0) {
    for (int i : rows)
      for (int k = 0; k < dims; ++k) mean[k] += cases[i].features[k];
    for (double& m : mean) m /= static_cast<double>(rows.size());
    std::vector<double> var(dims, 0.0);
    for (int i : rows)
      for (int k = 0; k < dims; ++k) var[k] += std::pow(cases[i].features[k] - mean[k], 2);
    for (int k = 0; k < dims; ++k) {
      const double sd = std::sqrt(var[k] / static_cast<double>(rows.size()));
      // Floor the spread so rarely-seen histogram bins do not dominate.
      scale[k] = 1.0 / std::max(sd, 0.05);
    }
  }

  std::vector<double> apply(const std::vector<DiagnosisCase>& cases, const std::vector<int>& rows) const {
    std::vector<double> out;
    for (int i : rows)
      for (std::size_t k = 0; k < mean.size(); ++k) out.push_back((cases[i].features[k] - mean[k]) * scale[k]);
    return out;
  }
};

struct RepeatOutcome {
  std::vector<CvFold> folds;
  long correct = 0;
  long total = 0;
};

RepeatOutcome run_repeat(const std::vector<DiagnosisCase>& cases, const std::vector<int>& labels,
                         const DiagnosisTask& task, ClassifierKind classifier, const CvOptions& opts,
                         int repeat, Rng rng) {
  const int dims = static_cast<int>(cases.front().features.size());
  const std::vector<int> fold = stratified_folds(labels, opts.folds, rng);
  RepeatOutcome out;
  for (int f = 0; f < opts.folds; ++f) {
    std::vector<int> train, test;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      if (fold[i] < 0) continue;
      (fold[i] == f ? test : train).push_back(static_cast<int>(i));
    }
    train = balance_classes(train, labels, task.classes, rng);
    const Standardizer z(cases, train, dims);
    const std::vector<double> xtrain = z.apply(cases, train), xtest = z.apply(cases, test);
    std::vector<int> ytrain;
    for (int i : train) ytrain.push_back(labels[i]);
    std::vector<int> pred;
    if (classifier == ClassifierKind::kSvm) {
      FeatureMatrix m;
      m.rows = static_cast<int>(train.size());
      m.dims = dims;
      m.data.assign(xtrain.begin(), xtrain.end());
      FeatureMatrix t;
      t.rows = static_cast<int>(test.size());
      t.dims = dims;
      t.data.assign(xtest.begin(), xtest.end());
      SvmOptions so = opts.svm;
      so.seed = rng.next();
      pred = linear_svm_train(m, ytrain, task.classes, so).predict(t);
    } else {
      MlpOptions mo = opts.mlp;
      mo.seed = rng.next();
      pred = mlp_train(xtrain, ytrain, dims, task.classes, mo).predict(xtest);
    }
    int correct = 0;
    for (std::size_t k = 0; k < test.size(); ++k) correct += pred[k] == labels[test[k]];
    out.folds.push_back({repeat, f, static_cast<int>(test.size()),
                         static_cast<double>(correct) / static_cast<double>(test.size())});
    out.correct += correct;
    out.total += static_cast<long>(test.size());
  }
  return out;
}

}  // namespace

CvResult cross_validate(const std::vector<DiagnosisCase>& cases, const DiagnosisTask& task,
                        ClassifierKind classifier, const CvOptions& opts) {
  if (opts.folds < 2 || opts.repeats < 1) throw ConfigError("cross validation needs folds >= 2 and repeats >= 1");
  if (cases.empty()) throw DataError("no cases");
  const std::size_t dims = cases.front().features.size();
  std::vector<int> labels(cases.size(), -1);
  std::vector<int> per_class(task.classes, 0);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (cases[i].features.size() != dims) throw DataError("case " + cases[i].id + " has a different feature length");
    if (auto c = task.map(cases[i].diagnosis)) {
      labels[i] = *c;
      ++per_class[*c];
    }
  }
  for (int c = 0; c < task.classes; ++c)
    if (per_class[c] < opts.folds) {
      throw ConfigError("task " + task.name + " class " + std::to_string(c) + " has " + std::to_string(per_class[c]) +
                        " cases, fewer than " + std::to_string(opts.folds) + " folds");
    }

  Rng root(opts.seed);
  std::vector<Rng> streams;
  for (int r = 0; r < opts.repeats; ++r) streams.push_back(root.split());
  std::vector<RepeatOutcome> outcomes(opts.repeats);
  auto work = [&](int r) { outcomes[r] = run_repeat(cases, labels, task, classifier, opts, r, streams[r]); };
  if (opts.threads > 1) {
    for (int start = 0; start < opts.repeats; start += opts.threads) {
      std::vector<std::thread> pool;
      for (int r = start; r < std::min(opts.repeats, start + opts.threads); ++r) pool.emplace_back(work, r);
      for (auto& t : pool) t.join();
    }
  } else {
    for (int r = 0; r < opts.repeats; ++r) work(r);
  }
  CvResult result;
  double sum = 0;
  for (const auto& o : outcomes) {
    const double acc = static_cast<double>(o.correct) / static_cast<double>(o.total);
    result.repeat_accuracy.push_back(acc);
    sum += acc;
    result.folds.insert(result.folds.end(), o.folds.begin(), o.folds.end());
  }
  result.mean_accuracy = sum / opts.repeats;
  return result;
}

std::string cv_results_csv(const std::string& task, ClassifierKind classifier, FeatureVariant variant,
                           const CvResult& r, bool header) {
  std::ostringstream os;
  if (header) os << "task,classifier,features,repeat,fold,accuracy\n";
  os << std::fixed << std::setprecision(6);
  for (const auto& f : r.folds) {
    os << task << "," << to_string(classifier) << "," << to_string(variant) << "," << f.repeat << "," << f.fold
       << "," << f.accuracy << "\n";
  }
  return os.str();
}

std::vector<ManifestEntry> read_case_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open case manifest " + path.string());
  const std::filesystem::path base = path.parent_path();
  std::vector<ManifestEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.rfind("case_id", 0) == 0) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 4) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 4 comma-separated fields");
    }
    auto resolve = [&](const std::string& p) {
      const std::filesystem::path q(p);
      return q.is_absolute() ? q : base / q;
    };
    out.push_back({f[0], resolve(f[1]), resolve(f[2]), parse_diagnosis(f[3])});
  }
  if (out.empty()) throw DataError("case manifest " + path.string() + " lists no cases");
  return out;
}

std::vector<DiagnosisCase> load_cases(const std::vector<ManifestEntry>& entries, FeatureVariant variant) {
  std::vector<DiagnosisCase> out;
  for (const auto& e : entries) {
    const LabelMask mask = read_png(e.mask, 1);
    const SuperpixelMap map = read_superpixels(e.superpixels);
    const CaseFeatures f = case_features(superpixel_labels(mask, map), map.adjacency);
    out.push_back({e.id, e.diagnosis, f.vector(variant)});
  }
  return out;
}

}  // namespace wsseg
