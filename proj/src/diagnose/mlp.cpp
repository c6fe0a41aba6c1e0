#include "wsseg/diagnose/mlp.hpp"

#include <cmath>
#include <sstream>

#include "wsseg/common/rng.hpp"
#include "wsseg/tensor/ops.hpp"
#include "wsseg/trainer/sgd.hpp"

namespace wsseg {

namespace {

Tensor<double> he_normal(Shape s, int fan_in, Rng& rng) {
  Tensor<double> t(s);
  const double sd = std::sqrt(2.0 / fan_in);
  for (auto& v : t.values()) v = rng.normal(0.0, sd);
  return t;
}

}  // namespace

Mlp::Mlp(int dims, int classes, const MlpOptions& opts) : dims_(dims), classes_(classes) {
  if (dims < 1 || classes < 2 || opts.hidden < 1) throw ConfigError("MLP needs dims >= 1, classes >= 2, hidden >= 1");
  Rng rng(opts.seed);
  w1_ = params_.add_param("mlp.hidden.w", he_normal({opts.hidden, dims, 1, 1}, dims, rng), true);
  b1_ = params_.add_param("mlp.hidden.b", Tensor<double>(Shape{1, opts.hidden, 1, 1}), false);
  w2_ = params_.add_param("mlp.out.w", he_normal({classes, opts.hidden, 1, 1}, opts.hidden, rng), true);
  b2_ = params_.add_param("mlp.out.b", Tensor<double>(Shape{1, classes, 1, 1}), false);
}

Var<double> Mlp::forward(const std::vector<double>& rows) const {
  if (rows.size() % dims_ != 0 || rows.empty()) throw DataError("MLP input is not a whole number of rows");
  const int n = static_cast<int>(rows.size() / dims_);
  Tensor<double> x(Shape{n, dims_, 1, 1});
  std::copy(rows.begin(), rows.end(), x.data());
  const Var<double> h = relu(conv2d(constant(std::move(x)), w1_, b1_, ConvGeometry{}));
  return conv2d(h, w2_, b2_, ConvGeometry{});
}

std::vector<int> Mlp::predict(const std::vector<double>& rows) const {
  const Tensor<double> s = forward(rows).value();
  std::vector<int> out(s.shape().n);
  for (int i = 0; i < s.shape().n; ++i) {
    int best = 0;
    for (int c = 1; c < classes_; ++c)
      if (s(i, c, 0, 0) > s(i, best, 0, 0)) best = c;
    out[i] = best;
  }
  return out;
}

Mlp mlp_train(const std::vector<double>& rows, const std::vector<int>& labels, int dims, int classes,
              const MlpOptions& opts) {
  if (opts.epochs < 0 || opts.batch_size < 1) throw ConfigError("MLP needs epochs >= 0 and batch_size >= 1");
  if (rows.size() != labels.size() * static_cast<std::size_t>(dims)) throw DataError("one label per MLP row required");
  for (int l : labels)
    if (l < 0 || l >= classes) throw DataError("MLP label out of range");
  Mlp mlp(dims, classes, opts);
  Sgd<double> sgd(mlp.parameters(), {opts.learning_rate, opts.momentum, opts.weight_decay});
  Rng rng(opts.seed ^ 0x5bd1e995ULL);
  std::vector<int> order(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  const std::vector<double> unit(classes, 1.0);
  for (int e = 0; e < opts.epochs; ++e) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0, batch = 0; start < order.size(); start += opts.batch_size, ++batch) {
      std::vector<double> x;
      std::vector<std::uint8_t> y;
      for (std::size_t k = start; k < std::min(order.size(), start + opts.batch_size); ++k) {
        const int i = order[k];
        x.insert(x.end(), rows.begin() + static_cast<std::ptrdiff_t>(i) * dims,
                 rows.begin() + static_cast<std::ptrdiff_t>(i + 1) * dims);
        y.push_back(static_cast<std::uint8_t>(labels[i]));
      }
      mlp.parameters().zero_grad();
      const Var<double> loss = weighted_softmax_cross_entropy(mlp.forward(x), std::span<const std::uint8_t>(y),
                                                              std::span<const double>(unit), std::nullopt);
      if (!std::isfinite(loss.value()[0])) {
        std::ostringstream os;
        os << "non-finite MLP loss at epoch " << e << ", batch " << batch;
        throw NumericalError(os.str());
      }
      loss.backward();
      sgd.step();
    }
  }
  return mlp;
}

}  // namespace wsseg
