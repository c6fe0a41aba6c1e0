#pragma once

#include "wsseg/tensor/ops.hpp"

namespace wsseg::kernels {

/// Geometry of one forward cross-correlation y = x (*) w.
struct ConvProblem {
  int batch = 1;
  int in_channels = 0;
  int in_h = 0;
  int in_w = 0;
  int out_channels = 0;
  int out_h = 0;
  int out_w = 0;
  int kernel = 1;
  int stride = 1;
  int padding = 0;
  int dilation = 1;
};

// y is overwritten; dx and dw are accumulated into.
template <typename T>
void conv_forward(const ConvProblem& p, const T* x, const T* w, T* y, ConvAlgorithm algo);
template <typename T>
void conv_backward_data(const ConvProblem& p, const T* dy, const T* w, T* dx,
                        ConvAlgorithm algo);
template <typename T>
void conv_backward_weight(const ConvProblem& p, const T* x, const T* dy, T* dw,
                          ConvAlgorithm algo);

}  // namespace wsseg::kernels
