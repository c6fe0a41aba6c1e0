#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "wsseg/tensor/var.hpp"

namespace wsseg {

/// Which convolution kernel implementation to run.
enum class ConvAlgorithm {
  kAuto,    // packed path, chosen by kernel geometry
  kDirect,  // naive nested loops; the correctness reference
  kIm2col,  // column packing + GEMM
};

/// Stride, padding and dilation shared by conv2d and conv_transpose2d.
struct ConvGeometry {
  int stride = 1;
  int padding = 0;
  int dilation = 1;
  int output_padding = 0;  // transposed only; must be < stride
};

/// Output extent of a forward convolution along one axis.
int conv_out_size(int in, int kernel, const ConvGeometry& g);
/// Output extent of a transposed convolution along one axis.
int conv_transpose_out_size(int in, int kernel, const ConvGeometry& g);

/// Cross-correlation. weight: (out, in, k, k); bias: (1, out, 1, 1) or undefined.
template <typename T>
Var<T> conv2d(const Var<T>& input, const Var<T>& weight, const Var<T>& bias,
              const ConvGeometry& g, ConvAlgorithm algo = ConvAlgorithm::kAuto);

/// Adjoint of conv2d with the same weight tensor: weight (in, out, k, k),
/// i.e. conv2d's (out, in) order read from the other side.
template <typename T>
Var<T> conv_transpose2d(const Var<T>& input, const Var<T>& weight, const Var<T>& bias,
                        const ConvGeometry& g, ConvAlgorithm algo = ConvAlgorithm::kAuto);

/// 3x3 average pooling with padding 1; padded cells are excluded from the divisor.
template <typename T>
Var<T> avg_pool3x3(const Var<T>& input, int stride);

/// Running statistics for batch_norm; updated in place in training mode.
template <typename T>
struct BatchNormStats {
  Var<T> mean;  // (1, C, 1, 1)
  Var<T> var;   // (1, C, 1, 1)
};

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

template <typename T>
Var<T> batch_norm(const Var<T>& input, const Var<T>& gamma, const Var<T>& beta,
                  BatchNormStats<T>& stats, bool training);

template <typename T>
Var<T> relu(const Var<T>& input);

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);

/// Element-wise product.
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> scale(const Var<T>& a, T factor);

/// Sum of all entries as a 1x1x1x1 scalar.
template <typename T>
Var<T> sum(const Var<T>& a);

/// Centered spatial window of size (h, w). (H - h) and (W - w) must be even.
template <typename T>
Var<T> central_crop(const Var<T>& input, int h, int w);

/// Mean over non-ignored pixels of w[t] * -log softmax(logits)[t].
/// `target` holds N*H*W labels in NHW order.
template <typename T>
Var<T> weighted_softmax_cross_entropy(const Var<T>& logits,
                                      std::span<const std::uint8_t> target,
                                      std::span<const double> class_weights,
                                      std::optional<int> ignore_index = 255);

/// Channel-wise softmax, no graph.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

}  // namespace wsseg
