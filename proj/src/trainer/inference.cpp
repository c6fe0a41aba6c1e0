#include "wsseg/trainer/inference.hpp"

#include "wsseg/tensor/ops.hpp"
#include "wsseg/trainer/data.hpp"

namespace wsseg {

int default_stride(int patch) { return patch == kPatchSize ? kPatchStride : std::max(1, patch - patch * 7 / 32); }

Segmentation segment_roi(Model<float>& model, const Image& image, int batch_size, int stride) {
  const ModelConfig& cfg = model.config();
  if (image.channels != 3) throw DataError("segmentation needs an RGB image");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  const int patch = cfg.patch_size;
  const PatchGrid grid = PatchGrid::make(image.height, image.width, patch, stride > 0 ? stride : default_stride(patch));
  const int border = cfg.instance_border(cfg.resolutions - 1);
  Stitcher stitcher(grid, cfg.num_classes);
  const int n = static_cast<int>(grid.records.size());
  for (int start = 0; start < n; start += batch_size) {
    std::vector<Image> inputs;
    for (int i = start; i < std::min(n, start + batch_size); ++i) {
      inputs.push_back(border > 0 ? make_context(image, grid, i, border) : extract_patch(image, grid, i));
    }
    std::vector<const Image*> ptrs;
    for (const auto& im : inputs) ptrs.push_back(&im);
    const Tensor<float> probs = softmax(model.forward(Var<float>(images_to_tensor(ptrs)), false).value());
    const std::size_t per = static_cast<std::size_t>(cfg.num_classes) * patch * patch;
    for (int k = 0; k < static_cast<int>(inputs.size()); ++k) stitcher.add(start + k, probs.data() + k * per);
  }
  return {stitcher.finish(), stitcher.mean_scores(), grid};
}

const std::array<std::array<std::uint8_t, 3>, 8>& label_palette() {
  static const std::array<std::array<std::uint8_t, 3>, 8> palette{{
      {255, 255, 255},  // background
      {128, 0, 128},    // benign epithelium
      {0, 0, 255},      // malignant epithelium
      {255, 192, 203},  // normal stroma
      {255, 165, 0},    // desmoplastic stroma
      {0, 255, 255},    // secretion
      {255, 255, 0},    // necrosis
      {255, 0, 0},      // blood
  }};
  return palette;
}

Image colorize(const LabelMask& labels) {
  Image out(labels.height, labels.width, 3);
  for (std::size_t p = 0; p < labels.pixels(); ++p) {
    const int l = labels.data[p];
    const auto c = l < 8 ? label_palette()[l] : std::array<std::uint8_t, 3>{0, 0, 0};
    for (int ch = 0; ch < 3; ++ch) out.data[3 * p + ch] = c[ch];
  }
  return out;
}

Image overlay(const Image& image, const LabelMask& labels) {
  if (image.height != labels.height || image.width != labels.width || image.channels != 3) {
    throw DataError("overlay needs an RGB image and a mask of the same size");
  }
  const Image colors = colorize(labels);
  Image out = image;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = static_cast<std::uint8_t>((image.data[i] + colors.data[i] + 1) / 2);
  }
  return out;
}

}  // namespace wsseg
