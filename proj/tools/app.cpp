#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "wsseg/classicseg/baseline.hpp"
#include "wsseg/classicseg/features.hpp"
#include "wsseg/classicseg/slic.hpp"
#include "wsseg/common/error.hpp"
#include "wsseg/diagnose/crossval.hpp"
#include "wsseg/diagnose/synth.hpp"
#include "wsseg/image/png_io.hpp"
#include "wsseg/metrics/metrics.hpp"
#include "wsseg/netgraph/blocks.hpp"
#include "wsseg/netgraph/gradcheck_suite.hpp"
#include "wsseg/netgraph/receptive_field.hpp"
#include "wsseg/tensor/archive.hpp"
#include "wsseg/tiling/tiling.hpp"
#include "wsseg/trainer/inference.hpp"
#include "wsseg/trainer/train.hpp"

namespace fs = std::filesystem;

namespace wsseg::cli {

namespace {

struct KeyFlag {
  std::string key;
  std::string description;
};

const std::vector<KeyFlag>& model_keys() {
  static const std::vector<KeyFlag> keys{
      {"preset", "Named network variant: plain, residual, full, a1, a2, a3, fusion_a, fusion_b"},
      {"num_classes", "Number of output classes"},
      {"num_levels", "Encoder/decoder depth L"},
      {"encoder_channels", "Comma-separated encoder widths per level (empty = defaults)"},
      {"dense_decoder_channels", "Comma-separated dense-decoder widths, coarse to fine"},
      {"connectivity", "Encoder-decoder links: plain, residual or dense"},
      {"ia_rcu", "Inject the pooled input into every residual unit (true/false)"},
      {"dual_decoder", "Add the sparse refinement decoder (true/false)"},
      {"resolutions", "Number of resolution instances (1 or 2)"},
      {"fusion", "Multi-resolution merge: none, ours, fusion_a, fusion_b"},
      {"patch_size", "Inner patch side in pixels"},
      {"context_border", "Extra border per resolution step in pixels"},
      {"channel_scale", "Width multiplier, e.g. 0.125 or 1/8"},
  };
  return keys;
}

const std::vector<KeyFlag>& train_keys() {
  static const std::vector<KeyFlag> keys{
      {"learning_rate", "SGD learning rate"},
      {"momentum", "SGD momentum"},
      {"weight_decay", "L2 weight decay"},
      {"batch_size", "Samples per step"},
      {"max_steps", "Number of SGD steps"},
      {"seed", "Seed for initialization, shuffling and augmentation"},
      {"validation_fraction", "Share of --data held out when --val is absent"},
      {"validate_every", "Steps between validation passes"},
      {"augment_multiplicity", "Augmented variants per sample, identity included"},
      {"crop_size", "Side of random crops before resizing back"},
      {"allow_crop", "Allow crop augmentation (true/false)"},
  };
  return keys;
}

struct Overrides {
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;

  void add(CLI::App* sub, const std::vector<KeyFlag>& keys) {
    for (const auto& k : keys) {
      options.emplace_back(k.key, sub->add_option("--" + k.key, values[k.key], k.description));
    }
  }
  void apply(KeyValues& kv) const {
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) kv.set(key, values.at(key));
    }
  }
};

KeyValues load_keys(const std::string& path, const Overrides& ov, const std::string& what) {
  KeyValues kv = path.empty() ? KeyValues::parse("", "<" + what + " defaults>") : KeyValues::load(path);
  ov.apply(kv);
  return kv;
}

ModelConfig resolve_model(const std::string& path, const Overrides& ov) {
  const KeyValues kv = load_keys(path, ov, "model");
  ModelConfig c = ModelConfig::from_keys(kv);
  kv.check_all_used();
  return c;
}

TrainConfig resolve_train(const std::string& path, const Overrides& ov) {
  const KeyValues kv = load_keys(path, ov, "train");
  TrainConfig c = TrainConfig::from_keys(kv);
  kv.check_all_used();
  return c;
}

std::string comment_block(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.empty()) out += "# " + line + "\n";
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
}

std::string numbered(int i) {
  std::ostringstream s;
  s << std::setw(4) << std::setfill('0') << i << ".png";
  return s.str();
}

LabelMask downscale_labels(const LabelMask& m, int factor) {
  if (factor == 1) return m;
  LabelMask out(m.height / factor, m.width / factor, 1);
  if (out.height < 1 || out.width < 1) throw DataError("mask too small for downscale factor");
  for (int r = 0; r < out.height; ++r) {
    for (int c = 0; c < out.width; ++c) out.at(r, c) = m.at(r * factor + factor / 2, c * factor + factor / 2);
  }
  return out;
}

std::vector<fs::path> png_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

struct Options {
  int threads = 1;

  struct {
    std::string out;
    int count = 250, size = 256, classes = 8;
    std::uint64_t seed = 1;
  } synth;

  struct {
    std::string image, mask, out;
    int patch = kPatchSize, stride = kPatchStride, border = kContextBorder, downscale = 1;
  } tile;

  struct {
    std::string model, train, data, val, checkpoint, log;
    Overrides model_over, train_over;
  } train;

  struct {
    std::string model, checkpoint, image, out, overlay;
    int batch = 4, stride = 0, downscale = 1;
    Overrides model_over;
  } predict;

  struct {
    std::string pred, gt, out, csv;
    int classes = 8;
  } eval;

  struct {
    std::uint64_t seed = 1;
    double tolerance = 1e-4;
    bool skip_model = false;
  } gradcheck;

  struct {
    std::string model;
    bool probe = false;
    Overrides model_over;
  } rf;

  struct Baseline {
    int classes = 8;
    double target_area = 3000.0, compactness = 10.0;
    int slic_iters = 10;
    double lambda = 1e-4;
    int epochs = 20, per_label_cap = 2000;
    std::uint64_t seed = 1;

    BaselineOptions options() const {
      BaselineOptions o;
      o.classes = classes;
      o.slic = {target_area, compactness, slic_iters};
      o.features.inner_radius = 2.0 * std::sqrt(target_area / std::numbers::pi);
      o.features.outer_radius = 4.0 * std::sqrt(target_area / std::numbers::pi);
      o.svm = {lambda, epochs, seed};
      o.per_label_cap = per_label_cap;
      return o;
    }
  };
  struct : Baseline {
    std::string data, out, feature_dump;
  } baseline_train;
  struct : Baseline {
    std::string svm, image, out, superpixels;
  } baseline_predict;

  struct {
    std::string manifest, task = "all", classifier = "both", features = "all_labels", out;
    int synthetic = 0, folds = 10, repeats = 10, hidden = 64, mlp_epochs = 200, svm_epochs = 20;
    std::uint64_t seed = 1;
  } diagnose;
};

namespace {

void add_baseline_flags(CLI::App* sub, Options::Baseline& b) {
  sub->add_option("--classes", b.classes, "Number of tissue labels")->capture_default_str();
  sub->add_option("--target_area", b.target_area, "Mean superpixel area in pixels")->capture_default_str();
  sub->add_option("--compactness", b.compactness, "SLIC spatial weight in L*a*b* units")->capture_default_str();
  sub->add_option("--slic_iters", b.slic_iters, "SLIC k-means iterations")->capture_default_str();
  sub->add_option("--lambda", b.lambda, "SVM L2 regularization weight")->capture_default_str();
  sub->add_option("--epochs", b.epochs, "SVM passes over the training superpixels")->capture_default_str();
  sub->add_option("--per_label_cap", b.per_label_cap, "Training superpixels kept per label and image")
      ->capture_default_str();
  sub->add_option("--seed", b.seed, "Seed for subsampling and SVM order")->capture_default_str();
}

int cmd_synth(const Options& o, std::ostream& out) {
  const auto& s = o.synth;
  const auto samples = synth_dataset(s.count, s.size, s.classes, s.seed);
  save_dataset(s.out, samples);
  std::ostringstream info;
  info << "# wsseg synth seed=" << s.seed << "\ncount=" << s.count << "\nsize=" << s.size
       << "\nclasses=" << s.classes << "\n";
  write_text(fs::path(s.out) / "dataset.txt", info.str());
  out << "wrote " << samples.size() << " samples to " << s.out << "\n";
  return kOk;
}

int cmd_tile(const Options& o, std::ostream& out) {
  const auto& t = o.tile;
  if (t.border < 0) throw ConfigError("--border must be >= 0");
  const Image image = downscale_box(read_png(t.image, 3), t.downscale);
  std::optional<LabelMask> mask;
  if (!t.mask.empty()) {
    mask = downscale_labels(read_png(t.mask, 1), t.downscale);
    if (mask->height != image.height || mask->width != image.width) {
      throw DataError("mask " + t.mask + " does not match the image size");
    }
  }
  const PatchGrid grid = PatchGrid::make(image.height, image.width, t.patch, t.stride);
  const fs::path dir(t.out);
  fs::create_directories(dir / "images");
  if (mask) fs::create_directories(dir / "masks");
  for (int i = 0; i < static_cast<int>(grid.records.size()); ++i) {
    write_png(dir / "images" / numbered(i),
              t.border > 0 ? make_context(image, grid, i, t.border) : extract_patch(image, grid, i));
    if (mask) write_png(dir / "masks" / numbered(i), extract_patch(*mask, grid, i));
  }
  write_manifest(dir / "manifest.tsv", grid);
  out << "wrote " << grid.records.size() << " patches to " << t.out << "\n";
  return kOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  const auto& t = o.train;
  const ModelConfig mc = resolve_model(t.model, t.model_over);
  const TrainConfig tc = resolve_train(t.train, t.train_over);
  const auto data = load_dataset(t.data);
  Model<float> model(mc, tc.seed);
  model.set_threads(o.threads);

  std::ofstream log_file;
  std::ostream* log = &out;
  if (!t.log.empty()) {
    log_file.open(t.log, std::ios::binary);
    if (!log_file) throw DataError("cannot write " + t.log);
    log = &log_file;
  }
  *log << "# wsseg train seed=" << tc.seed << "\n" << comment_block(mc.to_text()) << comment_block(tc.to_text());

  TrainOutputs outputs{log, t.checkpoint};
  const TrainResult r = t.val.empty() ? train(model, data, tc, outputs)
                                      : train(model, data, load_dataset(t.val), tc, outputs);
  out << std::fixed << std::setprecision(4) << "best_step=" << r.best_step << " val_pa=" << r.best.pa
      << " val_miou=" << r.best.miou << " val_f1=" << r.best.f1_macro << "\n";
  return kOk;
}

int cmd_predict(const Options& o, std::ostream& out) {
  const auto& p = o.predict;
  const ModelConfig mc = resolve_model(p.model, p.model_over);
  Model<float> model(mc, 1);
  load_checkpoint(p.checkpoint, model);
  model.set_threads(o.threads);
  const Image image = downscale_box(read_png(p.image, 3), p.downscale);
  const Segmentation seg = segment_roi(model, image, p.batch, p.stride);
  write_png(p.out, seg.labels);
  if (!p.overlay.empty()) write_png(p.overlay, overlay(image, seg.labels));
  out << "wrote " << seg.labels.height << "x" << seg.labels.width << " mask from " << seg.grid.records.size()
      << " patches to " << p.out << "\n";
  return kOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto& e = o.eval;
  std::vector<std::pair<fs::path, fs::path>> pairs;
  if (fs::is_directory(e.gt)) {
    if (!fs::is_directory(e.pred)) throw UsageError("--gt is a directory, so --pred must be one too");
    for (const auto& g : png_files(e.gt)) {
      const fs::path p = fs::path(e.pred) / g.filename();
      if (!fs::exists(p)) throw DataError("no prediction for " + g.string() + " (expected " + p.string() + ")");
      pairs.emplace_back(p, g);
    }
    if (pairs.empty()) throw DataError("no PNG masks in " + e.gt);
  } else {
    pairs.emplace_back(e.pred, e.gt);
  }
  ConfusionMatrix cm(e.classes);
  for (const auto& [p, g] : pairs) {
    const LabelMask pred = read_png(p, 1), gt = read_png(g, 1);
    if (pred.height != gt.height || pred.width != gt.width) {
      throw DataError("size mismatch between " + p.string() + " and " + g.string());
    }
    cm.accumulate(pred, gt);
  }
  const Scores s = compute_scores(cm);
  std::ostringstream report;
  report << "# wsseg eval pairs=" << pairs.size() << " classes=" << e.classes << "\n";
  const auto& names = e.classes == 8 ? tissue_label_names() : std::vector<std::string>{};
  report << score_table(s, names);
  if (e.out.empty()) {
    out << report.str();
  } else {
    write_text(e.out, report.str());
  }
  if (!e.csv.empty()) write_text(e.csv, "# wsseg eval pairs=" + std::to_string(pairs.size()) + "\n" + score_csv(s));
  return kOk;
}

int cmd_gradcheck(const Options& o, std::ostream& out) {
  const auto& g = o.gradcheck;
  GradSuiteOptions opts;
  opts.seed = g.seed;
  opts.tolerance = g.tolerance;
  opts.include_model = !g.skip_model;
  const auto reports = run_grad_suite(opts);
  int failed = 0;
  double worst = 0.0;
  out << "# wsseg gradcheck seed=" << g.seed << " tolerance=" << g.tolerance << "\n";
  for (const auto& r : reports) {
    out << (r.passed ? "ok   " : "FAIL ") << r.name << " max_rel_error=" << std::scientific << std::setprecision(3)
        << r.max_rel_error << std::defaultfloat << " checked=" << r.checked;
    if (!r.passed) out << " worst=" << r.worst_tensor << "[" << r.worst_index << "]";
    out << "\n";
    failed += r.passed ? 0 : 1;
    worst = std::max(worst, r.max_rel_error);
  }
  out << reports.size() << " checks, " << failed << " failed, max_rel_error=" << std::scientific
      << std::setprecision(3) << worst << std::defaultfloat << "\n";
  return failed == 0 ? kOk : kInternalError;
}

int cmd_rf(const Options& o, std::ostream& out) {
  const auto& r = o.rf;
  const FusionKind kind = resolve_model(r.model, r.model_over).fusion;
  if (kind == FusionKind::kNone) throw ConfigError("single-resolution models have no fusion module");
  int h = receptive_field(fusion_spec(kind)), w = h;
  if (r.probe) std::tie(h, w) = probe_fusion_receptive_field(kind);
  out << h << " x " << w << "\n";
  return kOk;
}

int cmd_baseline_train(const Options& o, std::ostream& out) {
  const auto& b = o.baseline_train;
  const BaselineOptions opts = b.options();
  const auto samples = load_dataset(b.data);
  const SuperpixelTable table = build_superpixel_table(samples, opts);
  if (!b.feature_dump.empty()) write_feature_dump(b.feature_dump, table.features);
  const LinearSvm svm = linear_svm_train(table.features, table.labels, opts.classes, opts.svm);
  write_archive(b.out, svm.to_archive());
  const BaselineEvaluation ev = evaluate_baseline(samples, svm, opts);
  out << "# wsseg baseline-train seed=" << b.seed << "\n"
      << "superpixels=" << table.labels.size() << " dims=" << table.features.dims << std::fixed
      << std::setprecision(4) << " train_superpixel_accuracy=" << ev.superpixel_accuracy
      << " train_pa=" << ev.pixel.pa << " train_miou=" << ev.pixel.miou << "\n";
  return kOk;
}

int cmd_baseline_predict(const Options& o, std::ostream& out) {
  const auto& b = o.baseline_predict;
  const LinearSvm svm = LinearSvm::from_archive(read_archive(b.svm));
  const Image image = read_png(b.image, 3);
  SuperpixelMap map;
  const LabelMask labels = baseline_predict(image, svm, b.options(), &map);
  write_png(b.out, labels);
  if (!b.superpixels.empty()) write_superpixels(b.superpixels, map);
  out << "wrote " << labels.height << "x" << labels.width << " mask with " << map.count << " superpixels to "
      << b.out << "\n";
  return kOk;
}

int cmd_diagnose(const Options& o, std::ostream& out) {
  const auto& d = o.diagnose;
  if (d.manifest.empty() == (d.synthetic == 0)) throw UsageError("give exactly one of --manifest or --synthetic");
  const FeatureVariant variant = parse_feature_variant(d.features);
  const auto cases = d.manifest.empty() ? synthetic_cases(d.synthetic, d.seed, variant)
                                        : load_cases(read_case_manifest(d.manifest), variant);
  std::vector<DiagnosisTask> tasks;
  if (d.task == "all") {
    tasks = DiagnosisTask::all();
  } else {
    tasks.push_back(DiagnosisTask::parse(d.task));
  }
  std::vector<ClassifierKind> classifiers;
  if (d.classifier == "both") {
    classifiers = {ClassifierKind::kSvm, ClassifierKind::kMlp};
  } else {
    classifiers.push_back(parse_classifier(d.classifier));
  }
  CvOptions cv;
  cv.folds = d.folds;
  cv.repeats = d.repeats;
  cv.seed = d.seed;
  cv.threads = o.threads;
  cv.svm.epochs = d.svm_epochs;
  cv.mlp.hidden = d.hidden;
  cv.mlp.epochs = d.mlp_epochs;

  std::string csv = "# wsseg diagnose seed=" + std::to_string(d.seed) + " cases=" + std::to_string(cases.size()) + "\n";
  bool header = true;
  out << "# wsseg diagnose seed=" << d.seed << " cases=" << cases.size() << " features=" << to_string(variant)
      << "\n";
  for (const auto& task : tasks) {
    for (ClassifierKind k : classifiers) {
      const CvResult r = cross_validate(cases, task, k, cv);
      csv += cv_results_csv(task.name, k, variant, r, header);
      header = false;
      double var = 0.0;
      for (double a : r.repeat_accuracy) var += (a - r.mean_accuracy) * (a - r.mean_accuracy);
      const double sd = r.repeat_accuracy.size() > 1 ? std::sqrt(var / (r.repeat_accuracy.size() - 1)) : 0.0;
      out << std::fixed << std::setprecision(4) << task.name << " " << to_string(k) << " accuracy=" << r.mean_accuracy
          << " sd=" << sd << "\n";
    }
  }
  if (!d.out.empty()) write_text(d.out, csv);
  return kOk;
}

}  // namespace

Application::Application() : opts_(std::make_unique<Options>()), app_(std::make_unique<CLI::App>()) {
  Options& o = *opts_;
  CLI::App& app = *app_;
  app.name("wsseg");
  app.description("Tissue segmentation and diagnosis pipeline for breast biopsy images");
  app.require_subcommand(1);
  app.add_option("--threads", o.threads, "Worker threads for parallel stages")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic textured segmentation dataset");
  synth->add_option("--out", o.synth.out, "Output directory (images/, masks/, dataset.txt)")->required();
  synth->add_option("--count", o.synth.count, "Number of image/mask pairs")->capture_default_str();
  synth->add_option("--size", o.synth.size, "Side length in pixels")->capture_default_str();
  synth->add_option("--classes", o.synth.classes, "Number of labels (at most 8)")->capture_default_str();
  synth->add_option("--seed", o.synth.seed, "Random seed")->capture_default_str();

  auto* tile = app.add_subcommand("tile", "Cut an ROI into overlapping patches with optional context borders");
  tile->add_option("--image", o.tile.image, "RGB PNG of the ROI")->required()->check(CLI::ExistingFile);
  tile->add_option("--mask", o.tile.mask, "Label PNG cut congruently with the image")->check(CLI::ExistingFile);
  tile->add_option("--out", o.tile.out, "Output directory (images/, masks/, manifest.tsv)")->required();
  tile->add_option("--patch", o.tile.patch, "Patch side in pixels")->capture_default_str();
  tile->add_option("--stride", o.tile.stride, "Distance between patch origins")->capture_default_str();
  tile->add_option("--border", o.tile.border, "Context border around image patches (0 = inner patch only)")
      ->capture_default_str();
  tile->add_option("--downscale", o.tile.downscale, "Integer box-filter downscale applied first")
      ->capture_default_str();

  auto* tr = app.add_subcommand("train", "Train a segmentation network; any config key can be overridden by a flag");
  tr->add_option("--model", o.train.model, "Model config file (key = value)")->check(CLI::ExistingFile);
  tr->add_option("--train", o.train.train, "Training config file (key = value)")->check(CLI::ExistingFile);
  tr->add_option("--data", o.train.data, "Dataset directory with images/ and masks/")
      ->required()
      ->check(CLI::ExistingDirectory);
  tr->add_option("--val", o.train.val, "Validation dataset directory (default: split --data)")
      ->check(CLI::ExistingDirectory);
  tr->add_option("--checkpoint", o.train.checkpoint, "Where to write the best model")->required();
  tr->add_option("--log", o.train.log, "Training log file (default: stdout)");
  o.train.model_over.add(tr, model_keys());
  o.train.train_over.add(tr, train_keys());

  auto* pr = app.add_subcommand("predict", "Segment an ROI with a trained network");
  pr->add_option("--model", o.predict.model, "Model config file the checkpoint was trained with")
      ->check(CLI::ExistingFile);
  pr->add_option("--checkpoint", o.predict.checkpoint, "Trained weights")->required()->check(CLI::ExistingFile);
  pr->add_option("--image", o.predict.image, "RGB PNG of the ROI")->required()->check(CLI::ExistingFile);
  pr->add_option("--out", o.predict.out, "Label mask PNG to write")->required();
  pr->add_option("--overlay", o.predict.overlay, "Colour overlay PNG to write");
  pr->add_option("--batch", o.predict.batch, "Patches per forward pass")->capture_default_str();
  pr->add_option("--stride", o.predict.stride, "Patch stride (0 = default for the patch size)")
      ->capture_default_str();
  pr->add_option("--downscale", o.predict.downscale, "Integer box-filter downscale applied first")
      ->capture_default_str();
  o.predict.model_over.add(pr, model_keys());

  auto* ev = app.add_subcommand("eval", "Score predicted masks against ground truth");
  ev->add_option("--pred", o.eval.pred, "Predicted mask PNG or directory")->required()->check(CLI::ExistingPath);
  ev->add_option("--gt", o.eval.gt, "Ground-truth mask PNG or directory (255 = ignore)")
      ->required()
      ->check(CLI::ExistingPath);
  ev->add_option("--classes", o.eval.classes, "Number of labels")->capture_default_str();
  ev->add_option("--out", o.eval.out, "Report file (default: stdout)");
  ev->add_option("--csv", o.eval.csv, "Per-class CSV file");

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient checks; exits 2 on any failure");
  gc->add_option("--seed", o.gradcheck.seed, "Seed for test inputs")->capture_default_str();
  gc->add_option("--tolerance", o.gradcheck.tolerance, "Maximum relative error")->capture_default_str();
  gc->add_flag("--skip-model", o.gradcheck.skip_model, "Skip the end-to-end network check");

  auto* rf = app.add_subcommand("rf", "Print the receptive field of the fusion module selected by --fusion or a model config");
  rf->add_option("--model", o.rf.model, "Model config file; reports its fusion module")->check(CLI::ExistingFile);
  rf->add_flag("--probe", o.rf.probe, "Measure by backpropagation instead of the layer recurrence");
  o.rf.model_over.add(rf, model_keys());

  auto* bt = app.add_subcommand("baseline-train", "Train the superpixel SVM baseline");
  bt->add_option("--data", o.baseline_train.data, "Dataset directory with images/ and masks/")
      ->required()
      ->check(CLI::ExistingDirectory);
  bt->add_option("--out", o.baseline_train.out, "SVM weights file to write")->required();
  bt->add_option("--feature-dump", o.baseline_train.feature_dump, "Also write the superpixel feature matrix");
  add_baseline_flags(bt, o.baseline_train);

  auto* bp = app.add_subcommand("baseline-predict", "Segment an image with the superpixel SVM baseline");
  bp->add_option("--svm", o.baseline_predict.svm, "SVM weights from baseline-train")
      ->required()
      ->check(CLI::ExistingFile);
  bp->add_option("--image", o.baseline_predict.image, "RGB PNG")->required()->check(CLI::ExistingFile);
  bp->add_option("--out", o.baseline_predict.out, "Label mask PNG to write")->required();
  bp->add_option("--superpixels", o.baseline_predict.superpixels, "Also write the superpixel map (.spm)");
  add_baseline_flags(bp, o.baseline_predict);

  auto* dg = app.add_subcommand("diagnose", "Cross-validate diagnostic classifiers on case features");
  dg->add_option("--manifest", o.diagnose.manifest, "CSV of case_id,mask,superpixels,diagnosis")
      ->check(CLI::ExistingFile);
  dg->add_option("--synthetic", o.diagnose.synthetic, "Use N synthetic cases per diagnosis instead");
  dg->add_option("--task", o.diagnose.task,
                 "four_class, invasive_vs_rest, benign_vs_rest, atypia_vs_dcis or all")
      ->capture_default_str();
  dg->add_option("--classifier", o.diagnose.classifier, "svm, mlp or both")->capture_default_str();
  dg->add_option("--features", o.diagnose.features, "all_labels or no_stroma")->capture_default_str();
  dg->add_option("--folds", o.diagnose.folds, "Folds per repeat")->capture_default_str();
  dg->add_option("--repeats", o.diagnose.repeats, "Repeats with fresh fold assignments")->capture_default_str();
  dg->add_option("--seed", o.diagnose.seed, "Seed for folds, balancing and training")->capture_default_str();
  dg->add_option("--hidden", o.diagnose.hidden, "MLP hidden units")->capture_default_str();
  dg->add_option("--mlp-epochs", o.diagnose.mlp_epochs, "MLP training epochs")->capture_default_str();
  dg->add_option("--svm-epochs", o.diagnose.svm_epochs, "SVM training epochs")->capture_default_str();
  dg->add_option("--out", o.diagnose.out, "Per-fold accuracy CSV");
}

Application::~Application() = default;

int Application::run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app_->parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app_->exit(e, out, err);
    err << "wsseg: " << e.what() << "\n";
    return kUserError;
  }
  using Handler = int (*)(const Options&, std::ostream&);
  static const std::vector<std::pair<std::string, Handler>> handlers{
      {"synth", cmd_synth},         {"tile", cmd_tile},
      {"train", cmd_train},         {"predict", cmd_predict},
      {"eval", cmd_eval},           {"gradcheck", cmd_gradcheck},
      {"rf", cmd_rf},               {"baseline-train", cmd_baseline_train},
      {"baseline-predict", cmd_baseline_predict}, {"diagnose", cmd_diagnose},
  };
  try {
    for (const auto& [name, handler] : handlers) {
      if (app_->got_subcommand(name)) return handler(*opts_, out);
    }
    err << "wsseg: no subcommand\n";
    return kUserError;
  } catch (const NumericalError& e) {
    err << "wsseg: numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const ConfigError& e) {
    err << "wsseg: " << e.what() << "\n";
    return kUserError;
  } catch (const DataError& e) {
    err << "wsseg: " << e.what() << "\n";
    return kUserError;
  } catch (const UsageError& e) {
    err << "wsseg: " << e.what() << "\n";
    return kUserError;
  } catch (const fs::filesystem_error& e) {
    err << "wsseg: " << e.what() << "\n";
    return kUserError;
  } catch (const std::exception& e) {
    err << "wsseg: internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Application a;
  return a.run(args, out, err);
}

}  // namespace wsseg::cli
