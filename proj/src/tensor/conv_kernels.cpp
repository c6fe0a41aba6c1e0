#include "wsseg/tensor/conv_kernels.hpp"

#include <Eigen/Core>
#include <vector>

namespace wsseg::kernels {
namespace {

template <typename T>
using MatR = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

bool is_pointwise(const ConvProblem& p) {
  return p.kernel == 1 && p.stride == 1 && p.padding == 0;
}

ConvAlgorithm resolve(ConvAlgorithm algo) {
  return algo == ConvAlgorithm::kAuto ? ConvAlgorithm::kIm2col : algo;
}

// cols is (in_channels * k * k) x (out_h * out_w).
template <typename T>
void im2col(const ConvProblem& p, const T* x, T* cols) {
  const int k = p.kernel;
  const std::size_t plane = static_cast<std::size_t>(p.out_h) * p.out_w;
  for (int ci = 0; ci < p.in_channels; ++ci) {
    const T* xc = x + static_cast<std::size_t>(ci) * p.in_h * p.in_w;
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        T* row = cols + (static_cast<std::size_t>(ci) * k * k + kh * k + kw) * plane;
        for (int oh = 0; oh < p.out_h; ++oh) {
          const int ih = oh * p.stride - p.padding + kh * p.dilation;
          T* dst = row + static_cast<std::size_t>(oh) * p.out_w;
          if (ih < 0 || ih >= p.in_h) {
            std::fill(dst, dst + p.out_w, T(0));
            continue;
          }
          const T* src = xc + static_cast<std::size_t>(ih) * p.in_w;
          const int off = kw * p.dilation - p.padding;
          for (int ow = 0; ow < p.out_w; ++ow) {
            const int iw = ow * p.stride + off;
            dst[ow] = (iw >= 0 && iw < p.in_w) ? src[iw] : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const ConvProblem& p, const T* cols, T* x) {
  const int k = p.kernel;
  const std::size_t plane = static_cast<std::size_t>(p.out_h) * p.out_w;
  for (int ci = 0; ci < p.in_channels; ++ci) {
    T* xc = x + static_cast<std::size_t>(ci) * p.in_h * p.in_w;
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        const T* row = cols + (static_cast<std::size_t>(ci) * k * k + kh * k + kw) * plane;
        for (int oh = 0; oh < p.out_h; ++oh) {
          const int ih = oh * p.stride - p.padding + kh * p.dilation;
          if (ih < 0 || ih >= p.in_h) continue;
          const T* src = row + static_cast<std::size_t>(oh) * p.out_w;
          T* dst = xc + static_cast<std::size_t>(ih) * p.in_w;
          const int off = kw * p.dilation - p.padding;
          for (int ow = 0; ow < p.out_w; ++ow) {
            const int iw = ow * p.stride + off;
            if (iw >= 0 && iw < p.in_w) dst[iw] += src[ow];
          }
        }
      }
    }
  }
}

template <typename T>
void forward_direct(const ConvProblem& p, const T* x, const T* w, T* y) {
  const int k = p.kernel;
  for (int n = 0; n < p.batch; ++n) {
    for (int co = 0; co < p.out_channels; ++co) {
      for (int oh = 0; oh < p.out_h; ++oh) {
        for (int ow = 0; ow < p.out_w; ++ow) {
          T acc = 0;
          for (int ci = 0; ci < p.in_channels; ++ci) {
            for (int kh = 0; kh < k; ++kh) {
              const int ih = oh * p.stride - p.padding + kh * p.dilation;
              if (ih < 0 || ih >= p.in_h) continue;
              for (int kw = 0; kw < k; ++kw) {
                const int iw = ow * p.stride - p.padding + kw * p.dilation;
                if (iw < 0 || iw >= p.in_w) continue;
                acc += x[((static_cast<std::size_t>(n) * p.in_channels + ci) * p.in_h + ih) *
                             p.in_w + iw] *
                       w[((static_cast<std::size_t>(co) * p.in_channels + ci) * k + kh) * k + kw];
              }
            }
          }
          y[((static_cast<std::size_t>(n) * p.out_channels + co) * p.out_h + oh) * p.out_w + ow] =
              acc;
        }
      }
    }
  }
}

template <typename T>
void backward_data_direct(const ConvProblem& p, const T* dy, const T* w, T* dx) {
  const int k = p.kernel;
  for (int n = 0; n < p.batch; ++n)
    for (int co = 0; co < p.out_channels; ++co)
      for (int oh = 0; oh < p.out_h; ++oh)
        for (int ow = 0; ow < p.out_w; ++ow) {
          const T g =
              dy[((static_cast<std::size_t>(n) * p.out_channels + co) * p.out_h + oh) * p.out_w +
                 ow];
          for (int ci = 0; ci < p.in_channels; ++ci)
            for (int kh = 0; kh < k; ++kh) {
              const int ih = oh * p.stride - p.padding + kh * p.dilation;
              if (ih < 0 || ih >= p.in_h) continue;
              for (int kw = 0; kw < k; ++kw) {
                const int iw = ow * p.stride - p.padding + kw * p.dilation;
                if (iw < 0 || iw >= p.in_w) continue;
                dx[((static_cast<std::size_t>(n) * p.in_channels + ci) * p.in_h + ih) * p.in_w +
                   iw] +=
                    g * w[((static_cast<std::size_t>(co) * p.in_channels + ci) * k + kh) * k + kw];
              }
            }
        }
}

template <typename T>
void backward_weight_direct(const ConvProblem& p, const T* x, const T* dy, T* dw) {
  const int k = p.kernel;
  for (int n = 0; n < p.batch; ++n)
    for (int co = 0; co < p.out_channels; ++co)
      for (int oh = 0; oh < p.out_h; ++oh)
        for (int ow = 0; ow < p.out_w; ++ow) {
          const T g =
              dy[((static_cast<std::size_t>(n) * p.out_channels + co) * p.out_h + oh) * p.out_w +
                 ow];
          for (int ci = 0; ci < p.in_channels; ++ci)
            for (int kh = 0; kh < k; ++kh) {
              const int ih = oh * p.stride - p.padding + kh * p.dilation;
              if (ih < 0 || ih >= p.in_h) continue;
              for (int kw = 0; kw < k; ++kw) {
                const int iw = ow * p.stride - p.padding + kw * p.dilation;
                if (iw < 0 || iw >= p.in_w) continue;
                dw[((static_cast<std::size_t>(co) * p.in_channels + ci) * k + kh) * k + kw] +=
                    g * x[((static_cast<std::size_t>(n) * p.in_channels + ci) * p.in_h + ih) *
                              p.in_w + iw];
              }
            }
        }
}

}  // namespace

template <typename T>
void conv_forward(const ConvProblem& p, const T* x, const T* w, T* y, ConvAlgorithm algo) {
  if (resolve(algo) == ConvAlgorithm::kDirect) {
    forward_direct(p, x, w, y);
    return;
  }
  const int K = p.in_channels * p.kernel * p.kernel;
  const int P = p.out_h * p.out_w;
  const std::size_t in_plane = static_cast<std::size_t>(p.in_channels) * p.in_h * p.in_w;
  const std::size_t out_plane = static_cast<std::size_t>(p.out_channels) * P;
  Eigen::Map<const MatR<T>> W(w, p.out_channels, K);
  std::vector<T> cols;
  if (!is_pointwise(p)) cols.resize(static_cast<std::size_t>(K) * P);
  for (int n = 0; n < p.batch; ++n) {
    const T* xn = x + n * in_plane;
    const T* col_ptr = xn;
    if (!is_pointwise(p)) {
      im2col(p, xn, cols.data());
      col_ptr = cols.data();
    }
    Eigen::Map<const MatR<T>> C(col_ptr, K, P);
    Eigen::Map<MatR<T>> Y(y + n * out_plane, p.out_channels, P);
    Y.noalias() = W * C;
  }
}

template <typename T>
void conv_backward_data(const ConvProblem& p, const T* dy, const T* w, T* dx,
                        ConvAlgorithm algo) {
  if (resolve(algo) == ConvAlgorithm::kDirect) {
    backward_data_direct(p, dy, w, dx);
    return;
  }
  const int K = p.in_channels * p.kernel * p.kernel;
  const int P = p.out_h * p.out_w;
  const std::size_t in_plane = static_cast<std::size_t>(p.in_channels) * p.in_h * p.in_w;
  const std::size_t out_plane = static_cast<std::size_t>(p.out_channels) * P;
  Eigen::Map<const MatR<T>> W(w, p.out_channels, K);
  std::vector<T> cols(static_cast<std::size_t>(K) * P);
  for (int n = 0; n < p.batch; ++n) {
    Eigen::Map<const MatR<T>> DY(dy + n * out_plane, p.out_channels, P);
    if (is_pointwise(p)) {
      Eigen::Map<MatR<T>> DX(dx + n * in_plane, K, P);
      DX.noalias() += W.transpose() * DY;
    } else {
      Eigen::Map<MatR<T>> C(cols.data(), K, P);
      C.noalias() = W.transpose() * DY;
      col2im_add(p, cols.data(), dx + n * in_plane);
    }
  }
}

template <typename T>
void conv_backward_weight(const ConvProblem& p, const T* x, const T* dy, T* dw,
                          ConvAlgorithm algo) {
  if (resolve(algo) == ConvAlgorithm::kDirect) {
    backward_weight_direct(p, x, dy, dw);
    return;
  }
  const int K = p.in_channels * p.kernel * p.kernel;
  const int P = p.out_h * p.out_w;
  const std::size_t in_plane = static_cast<std::size_t>(p.in_channels) * p.in_h * p.in_w;
  const std::size_t out_plane = static_cast<std::size_t>(p.out_channels) * P;
  Eigen::Map<MatR<T>> DW(dw, p.out_channels, K);
  std::vector<T> cols;
  if (!is_pointwise(p)) cols.resize(static_cast<std::size_t>(K) * P);
  for (int n = 0; n < p.batch; ++n) {
    const T* col_ptr = x + n * in_plane;
    if (!is_pointwise(p)) {
      im2col(p, x + n * in_plane, cols.data());
      col_ptr = cols.data();
    }
    Eigen::Map<const MatR<T>> C(col_ptr, K, P);
    Eigen::Map<const MatR<T>> DY(dy + n * out_plane, p.out_channels, P);
    DW.noalias() += DY * C.transpose();
  }
}

#define WSSEG_INSTANTIATE(T)                                                                  \
  template void conv_forward<T>(const ConvProblem&, const T*, const T*, T*, ConvAlgorithm);  \
  template void conv_backward_data<T>(const ConvProblem&, const T*, const T*, T*,            \
                                      ConvAlgorithm);                                        \
  template void conv_backward_weight<T>(const ConvProblem&, const T*, const T*, T*,          \
                                        ConvAlgorithm);
WSSEG_INSTANTIATE(float)
WSSEG_INSTANTIATE(double)
#undef WSSEG_INSTANTIATE

}  // namespace wsseg::kernels
