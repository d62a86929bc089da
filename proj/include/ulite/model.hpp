// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ulite/ops.hpp"

namespace ulite {

enum class DwVariant { axial, square };

std::string to_string(DwVariant v);
DwVariant parse_dw_variant(std::string_view s);

/// Architecture hyper-parameters. Defaults give the reference network.
struct ModelConfig {
  std::array<std::size_t, 6> widths{16, 32, 64, 128, 256, 512};
  std::size_t n = 7;
  DwVariant dw_variant = DwVariant::axial;
  bool addc = true;
  std::size_t bottleneck_width = 256;
  std::uint64_t seed = 0;

  /// Throws ConfigError on non-positive widths or an even/zero n.
  void validate() const;
  /// Short label such as "axial-n7-addc".
  std::string variant_name() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Parses flat `key = value` text. Blank lines and `#` comments are
/// ignored; unknown keys, duplicate keys and bad values raise ConfigError
/// carrying the 1-based line number.
ModelConfig parse_config(std::string_view text);
ModelConfig load_config(const std::string& path);
std::string format_config(const ModelConfig& cfg);

/// The 12-point ablation grid {axial, square} x n in {3,5,7} x ADDC {on, off},
/// sharing widths, bottleneck width and seed with `base`.
std::vector<ModelConfig> list_variants(const ModelConfig& base = {});

template <typename T>
using TensorVisitor = std::function<void(const std::string& name, BasicTensor<T>& value, BasicTensor<T>* grad)>;
template <typename T>
using ConstTensorVisitor = std::function<void(const std::string& name, const BasicTensor<T>& value, bool learnable)>;

/// x' = x + DW_1xn(x) + DW_nx1(x);  y = GELU(PW(BN(x'))).
///
/// The square variant replaces the two axial kernels with one n x n kernel
/// and keeps the residual and the BN/PW/GELU tail unchanged.
template <typename T>
class AxialDWModule {
 public:
  static AxialDWModule make(std::size_t c_in, std::size_t c_out, std::size_t n, DwVariant variant, Rng& rng);

  BasicTensor<T> forward(const BasicTensor<T>& x);
  /// Requires a preceding forward(); accumulates parameter gradients.
  BasicTensor<T> backward(const BasicTensor<T>& dy);
  /// Eval-mode forward with no caching and no state change.
  BasicTensor<T> infer(const BasicTensor<T>& x) const;

  void set_mode(Mode m) { bn.mode = m; }
  void visit(const std::string& prefix, const TensorVisitor<T>& fn);
  void visit(const std::string& prefix, const ConstTensorVisitor<T>& fn) const;

  std::size_t in_channels() const { return pw.in_channels(); }
  std::size_t out_channels() const { return pw.out_channels(); }
  std::size_t param_count() const;

  DwVariant variant = DwVariant::axial;
  /// Axial: {1 x n, n x 1}. Square: {n x n}.
  std::vector<DepthwiseConv<T>> dw;
  BatchNorm<T> bn;
  PointwiseConv<T> pw;

 private:
  BasicTensor<T> x_, residual_, normed_, pre_act_;
  BatchNormCache<T> bn_cache_;
};

/// Channel-reducing pointwise conv, residual sum of axial dilated 3-tap
/// depthwise pairs (d = 1, 2, 3), then BN -> PW -> GELU. With ADDC off a
/// single axial 7-tap pair replaces the dilated branches.
template <typename T>
class BottleneckBlock {
 public:
  static BottleneckBlock make(std::size_t c_in, std::size_t c_mid, bool addc, Rng& rng);

  BasicTensor<T> forward(const BasicTensor<T>& x);
  BasicTensor<T> backward(const BasicTensor<T>& dy);
  BasicTensor<T> infer(const BasicTensor<T>& x) const;

  void set_mode(Mode m) { bn.mode = m; }
  void visit(const std::string& prefix, const TensorVisitor<T>& fn);
  void visit(const std::string& prefix, const ConstTensorVisitor<T>& fn) const;
  std::size_t param_count() const;

  bool addc = true;
  PointwiseConv<T> pw_in;
  /// One {1 x k, k x 1} pair per branch, in dilation order.
  std::vector<std::array<DepthwiseConv<T>, 2>> branches;
  BatchNorm<T> bn;
  PointwiseConv<T> pw_out;

 private:
  BasicTensor<T> reduced_, residual_, normed_, pre_act_, x_;
  BatchNormCache<T> bn_cache_;
};

/// Stem + five pooled encoder stages + bottleneck at 1/32 + five decoder
/// stages with concatenated skips + 1x1 head + sigmoid.
template <typename T>
class ULiteModel {
 public:
  static constexpr std::size_t kStages = 5;

  explicit ULiteModel(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }

  /// (N,3,H,W) -> (N,1,H,W) probabilities. H and W must be multiples of 64.
  BasicTensor<T> forward(const BasicTensor<T>& x);
  BasicTensor<T> backward(const BasicTensor<T>& dprob);
  /// Eval-mode prediction; never mutates the model. `drop_skip` zeroes the
  /// encoder feature at that level (0..4) before it is concatenated.
  BasicTensor<T> infer(const BasicTensor<T>& x, std::optional<std::size_t> drop_skip = std::nullopt) const;

  void set_mode(Mode m);
  Mode mode() const { return mode_; }
  void zero_grad();

  /// Every tensor (learnables, then running stats interleaved in layer
  /// order) with its gradient slot; buffers get grad == nullptr.
  void visit(const TensorVisitor<T>& fn);
  void visit(const ConstTensorVisitor<T>& fn) const;

  /// Learnables in definition order.
  std::vector<NamedParam<T>> parameters();

  /// Encoder features F0..F5 captured by the last forward().
  const std::vector<BasicTensor<T>>& features() const { return features_; }

  AxialDWModule<T> stem;
  std::array<AxialDWModule<T>, kStages> encoders;
  BottleneckBlock<T> bottleneck;
  /// decoders[i - 1] maps level i to level i - 1.
  std::array<AxialDWModule<T>, kStages> decoders;
  PointwiseConv<T> head;

 private:
  ModelConfig cfg_;
  Mode mode_ = Mode::train;
  std::vector<BasicTensor<T>> features_;
  std::array<std::vector<std::uint32_t>, kStages> pool_argmax_;
  std::array<std::size_t, kStages> up_channels_{};
  BasicTensor<T> head_in_, prob_;
};

void check_input_dims(const Shape& s);

// ---------------------------------------------------------------------------
// Parameter accounting

struct ParamRow {
  std::string layer;
  std::size_t params = 0;
  std::size_t buffers = 0;
  bool operator==(const ParamRow&) const = default;
};

struct ParamTable {
  std::vector<ParamRow> rows;
  std::size_t total() const;
  std::size_t buffer_total() const;
  std::string render() const;
  bool operator==(const ParamTable&) const = default;
};

std::size_t pointwise_param_count(std::size_t c_in, std::size_t c_out);
std::size_t depthwise_param_count(std::size_t channels, std::size_t kh, std::size_t kw);
std::size_t batchnorm_param_count(std::size_t channels);
std::size_t axial_module_param_count(std::size_t c_in, std::size_t c_out, std::size_t n, DwVariant variant);
std::size_t bottleneck_param_count(std::size_t c_in, std::size_t c_mid, bool addc);

/// Closed-form per-layer counts; no tensors are allocated.
ParamTable count_params(const ModelConfig& cfg);
/// Enumerates the arrays the model actually holds.
template <typename T>
ParamTable count_params(const ULiteModel<T>& model);

// ---------------------------------------------------------------------------
// Receptive-field footprints

/// Support of the input gradient for a loss on the centre output pixel.
struct Footprint {
  std::size_t size = 0;  // grid is size x size, centre at size / 2
  std::vector<std::uint8_t> cells;

  bool at(int dh, int dw) const;
  std::size_t count() const;
  /// '#' for support, '.' elsewhere; one row per line.
  std::string render() const;
};

/// One module (axial or square) with random nonzero kernels; BN in eval mode
/// so that batch statistics do not couple distant pixels.
Footprint module_footprint(std::size_t n, DwVariant variant, std::uint64_t seed = 7);
/// Bottleneck with only the dilation-`d` branch active (others zeroed).
Footprint dilated_branch_footprint(int dilation, std::uint64_t seed = 7);

extern template class AxialDWModule<float>;
extern template class AxialDWModule<double>;
extern template class BottleneckBlock<float>;
extern template class BottleneckBlock<double>;
extern template class ULiteModel<float>;
extern template class ULiteModel<double>;

}  // namespace ulite
