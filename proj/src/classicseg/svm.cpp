#include "wsseg/classicseg/svm.hpp"

#include <set>

#include "wsseg/common/rng.hpp"

namespace wsseg {

double LinearSvm::margin(int c, const float* x) const {
  const float* w = weights.data() + static_cast<std::size_t>(c) * (dims + 1);
  double s = w[dims];
  for (int k = 0; k < dims; ++k) s += static_cast<double>(w[k]) * x[k];
  return s;
}

int LinearSvm::predict(const float* x) const {
  int best = 0;
  double bm = margin(0, x);
  for (int c = 1; c < classes; ++c) {
    const double m = margin(c, x);
    if (m > bm) {
      bm = m;
      best = c;
    }
  }
  return best;
}

std::vector<int> LinearSvm::predict(const FeatureMatrix& x) const {
  if (x.dims != dims) throw DataError("feature dims " + std::to_string(x.dims) + " != SVM dims " + std::to_string(dims));
  std::vector<int> out(x.rows);
  for (int i = 0; i < x.rows; ++i) out[i] = predict(x.row(i));
  return out;
}

std::vector<ArchiveEntry> LinearSvm::to_archive() const {
  ArchiveEntry e;
  e.name = "svm.weights";
  e.dims = {static_cast<std::uint32_t>(classes), static_cast<std::uint32_t>(dims + 1)};
  e.data.assign(weights.begin(), weights.end());
  return {e};
}

LinearSvm LinearSvm::from_archive(const std::vector<ArchiveEntry>& entries) {
  for (const auto& e : entries) {
    if (e.name != "svm.weights") continue;
    if (e.dims.size() != 2 || e.dims[0] < 1 || e.dims[1] < 1) throw DataError("svm.weights must be classes x (dims+1)");
    LinearSvm s;
    s.classes = static_cast<int>(e.dims[0]);
    s.dims = static_cast<int>(e.dims[1]) - 1;
    s.weights.assign(e.data.begin(), e.data.end());
    return s;
  }
  throw DataError("archive has no svm.weights tensor");
}

LinearSvm linear_svm_train(const FeatureMatrix& x, const std::vector<int>& labels, int classes,
                           const SvmOptions& opts) {
  if (static_cast<int>(labels.size()) != x.rows) throw DataError("one label per feature row required");
  if (!(opts.lambda > 0.0) || opts.epochs < 1) throw ConfigError("SVM needs lambda > 0 and epochs >= 1");
  std::vector<int> rows;
  std::set<int> present;
  for (int i = 0; i < x.rows; ++i)
    if (labels[i] >= 0 && labels[i] < classes) {
      rows.push_back(i);
      present.insert(labels[i]);
    }
  if (present.size() < 2) throw ConfigError("SVM training needs at least two classes present");

  LinearSvm svm;
  svm.classes = classes;
  svm.dims = x.dims;
  const int d = x.dims + 1;
  svm.weights.assign(static_cast<std::size_t>(classes) * d, 0.0f);
  const long long total = static_cast<long long>(opts.epochs) * static_cast<long long>(rows.size());
  const long long average_from = total / 2 + 1;
  Rng root(opts.seed);
  std::vector<double> w(d), avg(d);
  for (int c = 0; c < classes; ++c) {
    Rng rng = root.split();
    std::fill(w.begin(), w.end(), 0.0);
    std::fill(avg.begin(), avg.end(), 0.0);
    std::vector<int> order = rows;
    long long t = 0;
    for (int e = 0; e < opts.epochs; ++e) {
      rng.shuffle(order.begin(), order.end());
      for (int i : order) {
        ++t;
        const float* xi = x.row(i);
        const double y = labels[i] == c ? 1.0 : -1.0;
        double m = w[d - 1];
        for (int k = 0; k < d - 1; ++k) m += w[k] * xi[k];
        const double eta = 1.0 / (opts.lambda * static_cast<double>(t));
        const double shrink = 1.0 - eta * opts.lambda;
        for (double& v : w) v *= shrink;
        if (y * m < 1.0) {
          for (int k = 0; k < d - 1; ++k) w[k] += eta * y * xi[k];
          w[d - 1] += eta * y;
        }
        if (t >= average_from) {
          for (int k = 0; k < d; ++k) avg[k] += w[k];
        }
      }
    }
    const double n = static_cast<double>(total - average_from + 1);
    for (int k = 0; k < d; ++k) svm.weights[static_cast<std::size_t>(c) * d + k] = static_cast<float>(avg[k] / n);
  }
  return svm;
}

}  // namespace wsseg
