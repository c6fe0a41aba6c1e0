#include "wsseg/netgraph/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wsseg/common/error.hpp"

namespace wsseg {
namespace {

const std::vector<int> kDefaultEncoder{64, 64, 128, 256, 512};
const std::vector<int> kDefaultDecoderHead{256, 128, 64, 64};  // followed by C

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

int scaled(int ch, double scale) {
  return std::max(1, static_cast<int>(std::lround(ch * scale)));
}

}  // namespace

std::string to_string(Connectivity c) {
  switch (c) {
    case Connectivity::kPlain: return "plain";
    case Connectivity::kResidual: return "residual";
    case Connectivity::kDense: return "dense";
  }
  return "?";
}

std::string to_string(FusionKind f) {
  switch (f) {
    case FusionKind::kNone: return "none";
    case FusionKind::kOurs: return "ours";
    case FusionKind::kFusionA: return "fusion_a";
    case FusionKind::kFusionB: return "fusion_b";
  }
  return "?";
}

Connectivity parse_connectivity(const std::string& s) {
  if (s == "plain") return Connectivity::kPlain;
  if (s == "residual") return Connectivity::kResidual;
  if (s == "dense") return Connectivity::kDense;
  throw ConfigError("unknown connectivity '" + s + "' (plain, residual, dense)");
}

FusionKind parse_fusion(const std::string& s) {
  if (s == "none") return FusionKind::kNone;
  if (s == "ours") return FusionKind::kOurs;
  if (s == "fusion_a") return FusionKind::kFusionA;
  if (s == "fusion_b") return FusionKind::kFusionB;
  throw ConfigError("unknown fusion '" + s + "' (none, ours, fusion_a, fusion_b)");
}

void ModelConfig::validate() const {
  if (num_classes < 1 || num_classes > 254) throw ConfigError("num_classes must be in 1..254");
  if (num_levels < 1 || num_levels > 10) throw ConfigError("num_levels must be in 1..10");
  if (!encoder_channels.empty() && static_cast<int>(encoder_channels.size()) != num_levels) {
    throw ConfigError("encoder_channels needs " + std::to_string(num_levels) + " entries");
  }
  if (!dense_decoder_channels.empty()) {
    if (static_cast<int>(dense_decoder_channels.size()) != num_levels) {
      throw ConfigError("dense_decoder_channels needs " + std::to_string(num_levels) + " entries");
    }
    if (dense_decoder_channels.back() != num_classes) {
      throw ConfigError("dense_decoder_channels must end with num_classes");
    }
  }
  for (int c : encoder_channels)
    if (c < 1) throw ConfigError("encoder_channels entries must be positive");
  for (int c : dense_decoder_channels)
    if (c < 1) throw ConfigError("dense_decoder_channels entries must be positive");
  if (!(channel_scale > 0.0)) throw ConfigError("channel_scale must be positive");
  if (resolutions < 1) throw ConfigError("resolutions must be >= 1");
  if ((fusion != FusionKind::kNone) != (resolutions >= 2)) {
    throw ConfigError("fusion must be 'none' exactly when resolutions = 1");
  }
  if (patch_size < 1 || context_border < 0) throw ConfigError("invalid patch geometry");
  const int unit = 1 << num_levels;
  if (patch_size % unit != 0 || (2 * context_border) % unit != 0) {
    throw ConfigError("patch_size and 2*context_border must be divisible by 2^num_levels = " +
                      std::to_string(unit));
  }
}

std::vector<int> ModelConfig::encoder_widths() const {
  std::vector<int> base = encoder_channels;
  if (base.empty()) {
    for (int l = 0; l < num_levels; ++l)
      base.push_back(l < 5 ? kDefaultEncoder[l] : kDefaultEncoder.back());
  }
  for (int& c : base) c = scaled(c, channel_scale);
  return base;
}

std::vector<int> ModelConfig::decoder_widths() const {
  std::vector<int> coarse_to_fine = dense_decoder_channels;
  if (coarse_to_fine.empty()) {
    // The last num_levels entries of [..., 256, 128, 64, 64, C].
    std::vector<int> full = kDefaultDecoderHead;
    while (static_cast<int>(full.size()) + 1 < num_levels) full.insert(full.begin(), full.front());
    full.push_back(num_classes);
    coarse_to_fine.assign(full.end() - num_levels, full.end());
  }
  std::vector<int> fine_to_coarse(coarse_to_fine.rbegin(), coarse_to_fine.rend());
  for (std::size_t i = 1; i < fine_to_coarse.size(); ++i)
    fine_to_coarse[i] = scaled(fine_to_coarse[i], channel_scale);
  return fine_to_coarse;
}

std::string ModelConfig::to_text() const {
  std::ostringstream os;
  os << "num_classes = " << num_classes << "\n"
     << "num_levels = " << num_levels << "\n";
  if (!encoder_channels.empty()) os << "encoder_channels = " << join(encoder_channels) << "\n";
  if (!dense_decoder_channels.empty())
    os << "dense_decoder_channels = " << join(dense_decoder_channels) << "\n";
  os << "connectivity = " << to_string(connectivity) << "\n"
     << "ia_rcu = " << (ia_rcu ? "true" : "false") << "\n"
     << "dual_decoder = " << (dual_decoder ? "true" : "false") << "\n"
     << "fusion = " << to_string(fusion) << "\n"
     << "resolutions = " << resolutions << "\n"
     << "patch_size = " << patch_size << "\n"
     << "context_border = " << context_border << "\n";
  os.precision(17);
  os << "channel_scale = " << channel_scale << "\n";
  return os.str();
}

ModelConfig ModelConfig::from_keys(const KeyValues& kv) {
  ModelConfig c;
  if (kv.has("preset")) c = model_preset(kv.get_string("preset", ""), kv.get_int("resolutions", 1));
  c.num_classes = kv.get_int("num_classes", c.num_classes);
  c.num_levels = kv.get_int("num_levels", c.num_levels);
  c.encoder_channels = kv.get_int_list("encoder_channels", c.encoder_channels);
  c.dense_decoder_channels = kv.get_int_list("dense_decoder_channels", c.dense_decoder_channels);
  c.connectivity = parse_connectivity(kv.get_string("connectivity", to_string(c.connectivity)));
  c.ia_rcu = kv.get_bool("ia_rcu", c.ia_rcu);
  c.dual_decoder = kv.get_bool("dual_decoder", c.dual_decoder);
  c.resolutions = kv.get_int("resolutions", c.resolutions);
  if (!kv.has("fusion")) {
    if (c.resolutions == 1) c.fusion = FusionKind::kNone;
    if (c.resolutions >= 2 && c.fusion == FusionKind::kNone) c.fusion = FusionKind::kOurs;
  }
  c.fusion = parse_fusion(kv.get_string("fusion", to_string(c.fusion)));
  c.patch_size = kv.get_int("patch_size", c.patch_size);
  c.context_border = kv.get_int("context_border", c.context_border);
  c.channel_scale = kv.get_double("channel_scale", c.channel_scale);
  c.validate();
  return c;
}

ModelConfig ModelConfig::from_text(std::string_view text) {
  const auto kv = KeyValues::parse(text, "<model config>");
  auto c = from_keys(kv);
  kv.check_all_used();
  return c;
}

const std::vector<std::string>& model_preset_names() {
  static const std::vector<std::string> names{"plain", "residual", "full", "a1",
                                              "a2",    "a3",       "fusion_a", "fusion_b"};
  return names;
}

ModelConfig model_preset(const std::string& name, int resolutions) {
  ModelConfig c;
  c.resolutions = resolutions;
  c.fusion = resolutions >= 2 ? FusionKind::kOurs : FusionKind::kNone;
  if (name == "plain" || name == "residual") {
    c.connectivity = name == "plain" ? Connectivity::kPlain : Connectivity::kResidual;
    c.ia_rcu = false;
    c.dual_decoder = false;
  } else if (name == "full") {
  } else if (name == "a1") {
    c.ia_rcu = false;
  } else if (name == "a2") {
    c.dual_decoder = false;
  } else if (name == "a3") {
    c.ia_rcu = false;
    c.dual_decoder = false;
  } else if (name == "fusion_a" || name == "fusion_b") {
    if (resolutions < 2) throw ConfigError("preset '" + name + "' needs resolutions >= 2");
    c.fusion = name == "fusion_a" ? FusionKind::kFusionA : FusionKind::kFusionB;
  } else {
    throw ConfigError("unknown model preset '" + name + "'");
  }
  c.validate();
  return c;
}

}  // namespace wsseg
