#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wsseg/classicseg/svm.hpp"
#include "wsseg/common/rng.hpp"
#include "wsseg/diagnose/features.hpp"
#include "wsseg/diagnose/mlp.hpp"

namespace wsseg {

enum class Diagnosis { kBenign, kAtypia, kDcis, kInvasive };
std::string to_string(Diagnosis d);
Diagnosis parse_diagnosis(const std::string& s);

enum class TaskId { kFourClass, kInvasiveVsRest, kBenignVsRest, kAtypiaVsDcis };

struct DiagnosisTask {
  TaskId id;
  std::string name;
  int classes;

  /// Task class of a diagnosis, or nothing when the task excludes it.
  std::optional<int> map(Diagnosis d) const;

  static DiagnosisTask get(TaskId id);
  static DiagnosisTask parse(const std::string& name);
  static std::vector<DiagnosisTask> all();
};

struct DiagnosisCase {
  std::string id;
  Diagnosis diagnosis;
  std::vector<double> features;
};

enum class ClassifierKind { kSvm, kMlp };
std::string to_string(ClassifierKind k);
ClassifierKind parse_classifier(const std::string& s);

struct CvOptions {
  int folds = 10;
  int repeats = 10;
  std::uint64_t seed = 1;
  SvmOptions svm;
  MlpOptions mlp;
  int threads = 1;  // repeats run concurrently; results do not depend on it
};

struct CvFold {
  int repeat;
  int fold;
  int test_cases;
  double accuracy;
};

struct CvResult {
  double mean_accuracy = 0.0;
  std::vector<double> repeat_accuracy;  // correct / cases over all test folds
  std::vector<CvFold> folds;
};

/// Stratified fold of each case index (-1 when the task excludes the case).
std::vector<int> stratified_folds(const std::vector<int>& task_labels, int folds, Rng& rng);

/// Per class, keeps a seeded random subset the size of the smallest class.
std::vector<int> balance_classes(const std::vector<int>& indices, const std::vector<int>& task_labels,
                                 int classes, Rng& rng);

/// Repeated stratified k-fold CV. Training folds are class-balanced by
/// subsampling and standardized per feature; test folds are left whole.
/// Throws ConfigError when a task class has fewer cases than folds.
CvResult cross_validate(const std::vector<DiagnosisCase>& cases, const DiagnosisTask& task,
                        ClassifierKind classifier, const CvOptions& opts);

/// Rows "task,classifier,features,repeat,fold,accuracy" with a header.
std::string cv_results_csv(const std::string& task, ClassifierKind classifier, FeatureVariant variant,
                           const CvResult& r, bool header = true);

struct ManifestEntry {
  std::string id;
  std::filesystem::path mask;
  std::filesystem::path superpixels;
  Diagnosis diagnosis;
};

/// "case_id,mask,superpixels,diagnosis" lines; a first line starting with
/// "case_id" is a header. Relative paths resolve against the manifest folder.
std::vector<ManifestEntry> read_case_manifest(const std::filesystem::path& path);

/// Reads each case's mask and superpixel map and computes its features.
std::vector<DiagnosisCase> load_cases(const std::vector<ManifestEntry>& entries, FeatureVariant variant);

}  // namespace wsseg
