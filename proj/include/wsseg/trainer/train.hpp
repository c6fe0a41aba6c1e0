#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wsseg/common/keyvalue.hpp"
#include "wsseg/metrics/metrics.hpp"
#include "wsseg/netgraph/model.hpp"
#include "wsseg/trainer/augment.hpp"
#include "wsseg/trainer/data.hpp"
#include "wsseg/trainer/sgd.hpp"

namespace wsseg {

struct TrainConfig {
  double learning_rate = 5e-4;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int batch_size = 10;
  int max_steps = 1000;
  std::uint64_t seed = 1;
  double validation_fraction = 0.1;
  int validate_every = 100;  // also validates after the last step
  int augment_multiplicity = 5;
  int crop_size = 224;
  bool allow_crop = true;

  /// Throws ConfigError on an invalid field.
  void validate() const;
  std::string to_text() const;
  static TrainConfig from_keys(const KeyValues& kv);
  static TrainConfig from_text(const std::string& text);
};

struct ValidationRecord {
  int step = 0;
  Scores scores;
};

struct TrainResult {
  std::vector<double> losses;  // one per step
  std::vector<ValidationRecord> validations;
  int best_step = -1;  // step of the best validation mIOU
  Scores best;
};

struct TrainOutputs {
  std::ostream* log = nullptr;              // one line per step
  std::filesystem::path checkpoint;         // best model, skipped when empty
};

/// Trains `model` in place. Sample images must match model.config().input_size()
/// and masks the patch size. Throws NumericalError naming the step and batch
/// samples when the loss or a gradient stops being finite.
TrainResult train(Model<float>& model, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const TrainConfig& cfg,
                  const TrainOutputs& out = {});

/// Splits `data` by cfg.validation_fraction and trains.
TrainResult train(Model<float>& model, const std::vector<Sample>& data, const TrainConfig& cfg,
                  const TrainOutputs& out = {});

/// Per-pixel argmax labels (ties to the smaller label) for an N x C x H x W tensor.
std::vector<std::uint8_t> argmax_labels(const Tensor<float>& scores);

/// Eval-mode scores of `model` over `samples`.
Scores evaluate(Model<float>& model, const std::vector<Sample>& samples, int batch_size = 4);

void save_checkpoint(const std::filesystem::path& path, const Model<float>& model);
void load_checkpoint(const std::filesystem::path& path, Model<float>& model);

}  // namespace wsseg
