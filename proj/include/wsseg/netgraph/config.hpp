#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wsseg/common/keyvalue.hpp"

namespace wsseg {

enum class Connectivity { kPlain, kResidual, kDense };
enum class FusionKind { kNone, kOurs, kFusionA, kFusionB };

std::string to_string(Connectivity c);
std::string to_string(FusionKind f);
Connectivity parse_connectivity(const std::string& s);
FusionKind parse_fusion(const std::string& s);

/// Declarative description of one network variant.
struct ModelConfig {
  int num_classes = 8;
  int num_levels = 5;
  // Empty lists select the defaults for num_levels (see encoder_widths()).
  std::vector<int> encoder_channels;
  // Coarse to fine; the last entry is num_classes.
  std::vector<int> dense_decoder_channels;
  Connectivity connectivity = Connectivity::kDense;
  bool ia_rcu = true;
  bool dual_decoder = true;
  FusionKind fusion = FusionKind::kOurs;
  int resolutions = 2;
  int patch_size = 256;
  int context_border = 64;
  double channel_scale = 1.0;

  /// Throws ConfigError on any inconsistency.
  void validate() const;

  /// Encoder width per level 1..L after channel scaling.
  std::vector<int> encoder_widths() const;
  /// Dense-decoder width per level 1..L (fine to coarse) after scaling;
  /// level 1 always has num_classes channels.
  std::vector<int> decoder_widths() const;

  /// Border of instance p (0 = inner patch, p = 1 the first context twin).
  int instance_border(int p) const { return p * context_border; }
  /// Spatial size the multi-resolution model consumes for one patch.
  int input_size() const { return patch_size + 2 * instance_border(resolutions - 1); }

  std::string to_text() const;
  static ModelConfig from_keys(const KeyValues& kv);
  static ModelConfig from_text(std::string_view text);
};

/// Named rows of the ablation matrix: plain, residual, full, a1, a2, a3,
/// fusion_a, fusion_b. `resolutions` 1 gives the single-resolution variant.
ModelConfig model_preset(const std::string& name, int resolutions);
const std::vector<std::string>& model_preset_names();

}  // namespace wsseg
