// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "ulite/tensor.hpp"

// Neural layers with explicit forward / backward pairs.
//
// Backward functions take the upstream gradient dL/dy, return dL/dx, and
// add (never assign) parameter gradients into the owning Param::grad.
// Every loop is parallel only over independent output planes or channels,
// so results are bit-identical for any thread count.

namespace ulite {

enum class Mode { train, eval };

/// One spatial kernel per channel (groups = C), zero "same" padding, stride 1.
template <typename T>
struct DepthwiseConv {
  Param<T> kernel;  // (C, 1, kH, kW)
  Param<T> bias;    // (C, 1, 1, 1)
  int dilation = 1;

  std::size_t channels() const { return kernel.value.shape().n; }
  std::size_t kernel_h() const { return kernel.value.shape().h; }
  std::size_t kernel_w() const { return kernel.value.shape().w; }
  std::size_t param_count() const { return kernel.numel() + bias.numel(); }

  /// He-normal kernel (fan_in = kH*kW), zero bias. Kernel extents must be odd.
  static DepthwiseConv make(std::size_t channels, std::size_t kh, std::size_t kw, int dilation, Rng& rng);
};

/// 1x1 convolution: per-pixel affine map across channels.
template <typename T>
struct PointwiseConv {
  Param<T> weight;  // (C_out, C_in, 1, 1)
  Param<T> bias;    // (C_out, 1, 1, 1)

  std::size_t in_channels() const { return weight.value.shape().c; }
  std::size_t out_channels() const { return weight.value.shape().n; }
  std::size_t param_count() const { return weight.numel() + bias.numel(); }

  /// He-normal weight (fan_in = C_in), zero bias.
  static PointwiseConv make(std::size_t c_in, std::size_t c_out, Rng& rng);
};

template <typename T>
struct BatchNorm {
  Param<T> gamma;  // (C, 1, 1, 1)
  Param<T> beta;
  BasicTensor<T> running_mean;  // buffers, not learnable
  BasicTensor<T> running_var;
  double momentum = 0.1;
  double eps = 1e-5;
  Mode mode = Mode::train;

  std::size_t channels() const { return gamma.value.shape().n; }
  /// Learnables only (gamma, beta).
  std::size_t param_count() const { return gamma.numel() + beta.numel(); }
  std::size_t buffer_count() const { return running_mean.numel() + running_var.numel(); }

  /// gamma = 1, beta = 0, running mean 0, running var 1.
  static BatchNorm make(std::size_t channels);
};

template <typename T>
struct BatchNormCache {
  BasicTensor<T> xhat;
  std::vector<double> inv_std;
  Mode mode = Mode::train;
};

template <typename T>
BasicTensor<T> depthwise_conv(const BasicTensor<T>& x, const DepthwiseConv<T>& p);
template <typename T>
BasicTensor<T> depthwise_conv_backward(const BasicTensor<T>& x, DepthwiseConv<T>& p, const BasicTensor<T>& dy);

template <typename T>
BasicTensor<T> pointwise_conv(const BasicTensor<T>& x, const PointwiseConv<T>& p);
template <typename T>
BasicTensor<T> pointwise_conv_backward(const BasicTensor<T>& x, PointwiseConv<T>& p, const BasicTensor<T>& dy);

/// Train mode normalizes with batch statistics (population variance) and
/// folds them into the running stats; eval mode uses the running stats.
/// `cache` may be null when no backward pass follows.
template <typename T>
BasicTensor<T> batch_norm(const BasicTensor<T>& x, BatchNorm<T>& p, BatchNormCache<T>* cache = nullptr);
/// Eval-mode normalization that never touches p.
template <typename T>
BasicTensor<T> batch_norm_eval(const BasicTensor<T>& x, const BatchNorm<T>& p);
template <typename T>
BasicTensor<T> batch_norm_backward(const BatchNormCache<T>& cache, BatchNorm<T>& p, const BasicTensor<T>& dy);

/// x * Phi(x), exact erf form.
template <typename T>
BasicTensor<T> gelu(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> gelu_backward(const BasicTensor<T>& x, const BasicTensor<T>& dy);

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x);
/// Takes the forward *output* y.
template <typename T>
BasicTensor<T> sigmoid_backward(const BasicTensor<T>& y, const BasicTensor<T>& dy);

/// 2x2 / stride 2. `argmax` (optional) receives the flat input index chosen
/// for each output element; ties go to the first element in row-major order.
template <typename T>
BasicTensor<T> max_pool2(const BasicTensor<T>& x, std::vector<std::uint32_t>* argmax = nullptr);
template <typename T>
BasicTensor<T> max_pool2_backward(const Shape& input_shape, const std::vector<std::uint32_t>& argmax,
                                  const BasicTensor<T>& dy);

/// Nearest-neighbour x2.
template <typename T>
BasicTensor<T> upsample2(const BasicTensor<T>& x);
template <typename T>
BasicTensor<T> upsample2_backward(const BasicTensor<T>& dy);

/// Channel concatenation [a, b]; batch and spatial extents must agree.
template <typename T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b);
/// Splits dy of a concat back into the gradients for a (first c_a channels) and b.
template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> concat_channels_backward(const BasicTensor<T>& dy, std::size_t c_a);

}  // namespace ulite
