#include "wsseg/trainer/train.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "wsseg/common/error.hpp"
#include "wsseg/tensor/archive.hpp"
#include "wsseg/tensor/ops.hpp"

namespace wsseg {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0,1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (max_steps < 1) throw ConfigError("max_steps must be positive");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must be in (0,1)");
  }
  if (validate_every < 1) throw ConfigError("validate_every must be positive");
  if (augment_multiplicity < 1) throw ConfigError("augment_multiplicity must be positive");
  if (crop_size < 1) throw ConfigError("crop_size must be positive");
}

std::string TrainConfig::to_text() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "learning_rate = " << learning_rate << "\n"
     << "momentum = " << momentum << "\n"
     << "weight_decay = " << weight_decay << "\n"
     << "batch_size = " << batch_size << "\n"
     << "max_steps = " << max_steps << "\n"
     << "seed = " << seed << "\n"
     << "validation_fraction = " << validation_fraction << "\n"
     << "validate_every = " << validate_every << "\n"
     << "augment_multiplicity = " << augment_multiplicity << "\n"
     << "crop_size = " << crop_size << "\n"
     << "allow_crop = " << (allow_crop ? "true" : "false") << "\n";
  return os.str();
}

TrainConfig TrainConfig::from_keys(const KeyValues& kv) {
  TrainConfig c;
  c.learning_rate = kv.get_double("learning_rate", c.learning_rate);
  c.momentum = kv.get_double("momentum", c.momentum);
  c.weight_decay = kv.get_double("weight_decay", c.weight_decay);
  c.batch_size = kv.get_int("batch_size", c.batch_size);
  c.max_steps = kv.get_int("max_steps", c.max_steps);
  c.seed = static_cast<std::uint64_t>(kv.get_int64("seed", static_cast<long long>(c.seed)));
  c.validation_fraction = kv.get_double("validation_fraction", c.validation_fraction);
  c.validate_every = kv.get_int("validate_every", c.validate_every);
  c.augment_multiplicity = kv.get_int("augment_multiplicity", c.augment_multiplicity);
  c.crop_size = kv.get_int("crop_size", c.crop_size);
  c.allow_crop = kv.get_bool("allow_crop", c.allow_crop);
  c.validate();
  return c;
}

TrainConfig TrainConfig::from_text(const std::string& text) {
  const KeyValues kv = KeyValues::parse(text);
  TrainConfig c = from_keys(kv);
  kv.check_all_used();
  return c;
}

std::vector<std::uint8_t> argmax_labels(const Tensor<float>& scores) {
  const Shape& s = scores.shape();
  const int n = s.n, C = s.c, h = s.h, w = s.w;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(n) * h * w);
  std::size_t k = 0;
  for (int b = 0; b < n; ++b)
    for (int r = 0; r < h; ++r)
      for (int q = 0; q < w; ++q) {
        int best = 0;
        for (int c = 1; c < C; ++c)
          if (scores(b, c, r, q) > scores(b, best, r, q)) best = c;
        out[k++] = static_cast<std::uint8_t>(best);
      }
  return out;
}

namespace {

void check_geometry(const ModelConfig& mc, const std::vector<Sample>& samples, const char* what) {
  const int in = mc.input_size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.image.height != in || s.image.width != in || s.mask.height != mc.patch_size ||
        s.mask.width != mc.patch_size) {
      std::ostringstream os;
      os << what << " sample " << i << " is image " << s.image.height << "x" << s.image.width
         << ", mask " << s.mask.height << "x" << s.mask.width << "; model expects image " << in
         << "x" << in << ", mask " << mc.patch_size << "x" << mc.patch_size;
      throw DataError(os.str());
    }
  }
}

bool all_finite(const Tensor<float>& t) {
  const float* p = t.data();
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!std::isfinite(p[i])) return false;
  return true;
}

}  // namespace

Scores evaluate(Model<float>& model, const std::vector<Sample>& samples, int batch_size) {
  ConfusionMatrix cm(model.config().num_classes);
  for (std::size_t i = 0; i < samples.size(); i += batch_size) {
    std::vector<const Image*> imgs;
    std::vector<const LabelMask*> masks;
    for (std::size_t j = i; j < std::min(samples.size(), i + batch_size); ++j) {
      imgs.push_back(&samples[j].image);
      masks.push_back(&samples[j].mask);
    }
    const Var<float> out = model.forward(Var<float>(images_to_tensor(imgs)), false);
    const auto pred = argmax_labels(out.value());
    const auto gt = masks_to_labels(masks);
    cm.accumulate(std::span<const std::uint8_t>(pred), std::span<const std::uint8_t>(gt),
                  masks[0]->width);
  }
  return compute_scores(cm);
}

void save_checkpoint(const std::filesystem::path& path, const Model<float>& model) {
  write_archive(path, model.parameters().to_archive());
}

void load_checkpoint(const std::filesystem::path& path, Model<float>& model) {
  model.parameters().load_archive(read_archive(path));
}

TrainResult train(Model<float>& model, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const TrainConfig& cfg,
                  const TrainOutputs& out) {
  cfg.validate();
  if (train_set.empty()) throw DataError("training set is empty");
  const ModelConfig& mc = model.config();
  check_geometry(mc, train_set, "training");
  check_geometry(mc, val_set, "validation");

  const std::vector<double> weights = class_weights(train_set, mc.num_classes);

  Rng rng(cfg.seed);
  Rng aug_rng = rng.split();
  Rng order_rng = rng.split();
  AugmentOptions aopts{cfg.augment_multiplicity, cfg.crop_size, cfg.allow_crop};
  struct Item {
    int sample;
    Transform t;
  };
  std::vector<Item> items;
  for (int i = 0; i < static_cast<int>(train_set.size()); ++i)
    for (const auto& t : plan_augmentation(train_set[i], aug_rng, aopts)) items.push_back({i, t});

  std::vector<int> order(items.size());
  std::size_t cursor = order.size();

  Sgd<float> sgd(model.parameters(), {cfg.learning_rate, cfg.momentum, cfg.weight_decay});
  TrainResult result;
  for (int step = 1; step <= cfg.max_steps; ++step) {
    std::vector<Sample> batch;
    std::vector<int> batch_items;
    while (static_cast<int>(batch.size()) < cfg.batch_size) {
      if (cursor == order.size()) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        order_rng.shuffle(order.begin(), order.end());
        cursor = 0;
      }
      const Item& it = items[order[cursor]];
      batch_items.push_back(order[cursor++]);
      batch.push_back(it.t.is_identity() ? train_set[it.sample]
                                         : apply_transform(train_set[it.sample], it.t, cfg.crop_size));
    }
    std::vector<const Image*> imgs;
    std::vector<const LabelMask*> masks;
    for (const auto& s : batch) {
      imgs.push_back(&s.image);
      masks.push_back(&s.mask);
    }
    const auto labels = masks_to_labels(masks);

    model.parameters().zero_grad();
    const Var<float> logits = model.forward(Var<float>(images_to_tensor(imgs)), true);
    const Var<float> loss = weighted_softmax_cross_entropy(
        logits, std::span<const std::uint8_t>(labels), std::span<const double>(weights));
    const double lv = loss.value().data()[0];

    auto fail = [&](const std::string& what) {
      std::ostringstream os;
      os << what << " at step " << step << " (batch " << step - 1 << ", items";
      for (int i : batch_items) os << " " << items[i].sample << "/" << i;
      os << ")";
      throw NumericalError(os.str());
    };
    if (!std::isfinite(lv) || !all_finite(logits.value())) fail("non-finite loss");
    loss.backward();
    for (const auto& p : model.parameters().params()) {
      if (p.var.has_grad() && !all_finite(p.var.grad())) fail("non-finite gradient in " + p.name);
    }
    sgd.step();
    result.losses.push_back(lv);

    std::ostringstream line;
    line << std::setprecision(6) << "step=" << step << " loss=" << lv << " lr=" << cfg.learning_rate;
    if (!val_set.empty() && (step % cfg.validate_every == 0 || step == cfg.max_steps)) {
      const Scores s = evaluate(model, val_set);
      result.validations.push_back({step, s});
      line << " val_pa=" << s.pa << " val_miou=" << s.miou << " val_f1=" << s.f1_macro;
      if (result.best_step < 0 || s.miou > result.best.miou) {
        result.best_step = step;
        result.best = s;
        if (!out.checkpoint.empty()) save_checkpoint(out.checkpoint, model);
      }
    }
    if (out.log) *out.log << line.str() << "\n" << std::flush;
  }
  if (val_set.empty() && !out.checkpoint.empty()) save_checkpoint(out.checkpoint, model);
  return result;
}

TrainResult train(Model<float>& model, const std::vector<Sample>& data, const TrainConfig& cfg,
                  const TrainOutputs& out) {
  const auto [tr, va] = split_indices(static_cast<int>(data.size()), cfg.validation_fraction, cfg.seed);
  std::vector<Sample> train_set, val_set;
  for (int i : tr) train_set.push_back(data[i]);
  for (int i : va) val_set.push_back(data[i]);
  return train(model, train_set, val_set, cfg, out);
}

}  // namespace wsseg
