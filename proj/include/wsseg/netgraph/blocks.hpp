#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wsseg/common/rng.hpp"
#include "wsseg/netgraph/config.hpp"
#include "wsseg/netgraph/params.hpp"
#include "wsseg/tensor/ops.hpp"

namespace wsseg {

/// One parameterized layer as recorded for summaries and parameter counts.
struct LayerInfo {
  std::string name;
  std::string kind;  // conv, deconv, bn
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;
  int dilation = 1;
  int downsample = 1;  // output extent = instance input extent / downsample
  int instance = -1;   // -1 for layers after the resolution merge
  std::size_t params = 0;
};

template <typename T>
struct ConvUnit {
  Var<T> weight;
  Var<T> bias;  // undefined when absent
  ConvGeometry geom;
  bool transposed = false;

  Var<T> forward(const Var<T>& x) const;
};

template <typename T>
struct BnUnit {
  Var<T> gamma;
  Var<T> beta;
  BatchNormStats<T> stats;

  Var<T> forward(const Var<T>& x, bool training);
};

/// conv -> BN [-> ReLU]; a bare conv (with bias) when `bn` is absent.
template <typename T>
struct ConvBn {
  ConvUnit<T> conv;
  std::optional<BnUnit<T>> bn;
  bool relu = true;

  Var<T> forward(const Var<T>& x, bool training);
};

/// relu(second(first(x)) + shortcut(x)); shortcut is identity or a
/// strided 1x1 projection with BN.
template <typename T>
struct Rcu {
  ConvBn<T> first;
  ConvBn<T> second;
  std::optional<ConvBn<T>> projection;

  Var<T> forward(const Var<T>& x, bool training);
};

/// Input-image path added to an encoder block: a 3x3 mix of the pooled
/// image followed by a 1x1 projection to the block's width.
template <typename T>
struct InputInjection {
  int pool_steps = 0;  // stride-2 poolings from the image to the block
  ConvBn<T> mix;
  ConvBn<T> project;

  /// x_block + F_IA(image). `pyramid[j]` is the image pooled j times.
  Var<T> forward(const Var<T>& x_block, const std::vector<Var<T>>& pyramid, bool training);
};

/// image pooled 0..depth times with stride-2 3x3 average pooling.
template <typename T>
std::vector<Var<T>> image_pyramid(const Var<T>& image, int depth);

/// log2(big / small); ConfigError unless the ratio is an exact power of two.
int power_of_two_steps(int big, int small);

/// x_block + F_IA(image) for a standalone block; validates the size ratio.
template <typename T>
Var<T> ia_rcu_forward(const Var<T>& x_block, const Var<T>& image, InputInjection<T>& ia,
                      bool training);

/// One dense-decoder level: F_d(prev) plus projected encoder links.
template <typename T>
struct DecoderLevel {
  int level = 1;  // 1-based; output at encoder level `level` resolution
  ConvBn<T> up;
  std::vector<std::pair<int, ConvBn<T>>> links;  // (encoder level i, F_D)

  /// `pooled[i-1][j]` is encoder level i output pooled j times (filled on demand).
  Var<T> forward(const Var<T>& prev, std::vector<std::vector<Var<T>>>& pooled, bool training);
};

template <typename T>
struct DenseDecoder {
  std::vector<DecoderLevel<T>> levels;  // index l-1 for level l
  ConvUnit<T> head;                     // level 1 -> input resolution

  Var<T> forward(const std::vector<Var<T>>& encoder_outputs, bool training);
};

/// Linear C-channel bottom-up path over all encoder levels.
template <typename T>
struct SparseDecoder {
  std::vector<ConvUnit<T>> project;  // index l-1: encoder level l -> C
  std::vector<ConvUnit<T>> up;       // index l-1: level l -> level l-1 (0 = input)

  Var<T> forward(const std::vector<Var<T>>& encoder_outputs) const;
};

/// Layers of a fusion variant as (kernel, dilation) with link structure.
struct FusionSpec {
  FusionKind kind = FusionKind::kNone;
  std::vector<std::pair<int, int>> layers;
  bool identity_links = false;
  bool parallel = false;
};

FusionSpec fusion_spec(FusionKind kind);

template <typename T>
struct Fusion {
  FusionSpec spec;
  std::vector<ConvBn<T>> layers;

  Var<T> forward(const Var<T>& y, bool training);
};

/// Creates named, He-initialized parameters and records layer metadata.
template <typename T>
class Builder {
 public:
  Builder(ParameterSet<T>& params, Rng& rng, std::vector<LayerInfo>* info)
      : params_(params), rng_(rng), info_(info) {}

  void set_instance(int p) { instance_ = p; }
  void set_prefix(std::string prefix) { prefix_ = std::move(prefix); }

  ConvUnit<T> conv(const std::string& name, int in, int out, int k, ConvGeometry g, bool bias,
                   int downsample, bool transposed = false);
  BnUnit<T> bn(const std::string& name, int channels, int downsample);
  ConvBn<T> conv_bn(const std::string& name, int in, int out, int k, ConvGeometry g, bool relu,
                    int downsample, bool transposed = false);

  Rcu<T> rcu(const std::string& name, int in, int out, int stride, int downsample);
  InputInjection<T> injection(const std::string& name, int channels, int pool_steps);
  Fusion<T> fusion(const std::string& name, FusionKind kind, int channels);

 private:
  ParameterSet<T>& params_;
  Rng& rng_;
  std::vector<LayerInfo>* info_;
  int instance_ = -1;
  std::string prefix_;
};

}  // namespace wsseg
