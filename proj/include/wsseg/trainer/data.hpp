#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "wsseg/image/raster.hpp"
#include "wsseg/tensor/tensor.hpp"

namespace wsseg {

/// Image with its label mask. For context training the image is larger than
/// the mask by the same border on every side.
struct Sample {
  Image image;
  LabelMask mask;
};

/// Inverse class probability weights w_c = N / (C * n_c) over non-ignored
/// pixels; classes with n_c = 0 get weight 0.
std::vector<double> class_weights(const std::vector<const LabelMask*>& masks, int classes);
std::vector<double> class_weights(const std::vector<Sample>& samples, int classes);

/// Same, from per-class pixel counts.
std::vector<double> class_weights_from_counts(const std::vector<std::uint64_t>& counts);

/// Stacks images into N x 3 x H x W with (v - 128) / 64 scaling.
Tensor<float> images_to_tensor(const std::vector<const Image*>& images);
/// Concatenated masks in NHW order.
std::vector<std::uint8_t> masks_to_labels(const std::vector<const LabelMask*>& masks);

/// Seeded split into (train, validation) index lists; validation gets
/// round(n * fraction) items, at least one when n > 1.
std::pair<std::vector<int>, std::vector<int>> split_indices(int n, double fraction,
                                                            std::uint64_t seed);

/// Voronoi-cell images whose class decides colour and stripe texture; class
/// frequencies follow a geometric profile (ratio 0.7) so weighting matters.
std::vector<Sample> synth_dataset(int count, int size, int classes, std::uint64_t seed);

/// Mean colour of class `c` in the synthetic data (RGB).
std::array<double, 3> synth_class_color(int c);

/// Writes images/NNNN.png and masks/NNNN.png under `dir`.
void save_dataset(const std::filesystem::path& dir, const std::vector<Sample>& samples);
/// Reads pairs written by save_dataset (matching file names, sorted).
std::vector<Sample> load_dataset(const std::filesystem::path& dir);

}  // namespace wsseg
