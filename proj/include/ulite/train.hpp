// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ulite/data.hpp"
#include "ulite/model.hpp"

namespace ulite {

// ---------------------------------------------------------------------------
// Dice loss

struct DiceLossConfig {
  double smooth = 1e-5;
};

template <typename T>
struct DiceLossResult {
  double loss = 0.0;
  /// dL/dpred, same shape as pred.
  BasicTensor<T> grad;
};

/// L = 1 - (2 sum(G*P) + s) / (sum(G + P) + s) over every pixel of the batch.
/// gt must be binary (InvalidInputError otherwise).
template <typename T>
DiceLossResult<T> dice_loss(const BasicTensor<T>& pred, const BasicTensor<T>& gt, const DiceLossConfig& cfg = {});

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a fixed, ordered parameter list. Moment updates
/// are evaluated in double per element and stored back in T.
template <typename T>
class Adam {
 public:
  Adam(std::vector<NamedParam<T>> params, AdamConfig cfg = {});

  void step();
  void zero_grad();

  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }

  std::uint64_t t = 0;
  const std::vector<NamedParam<T>>& params() const { return params_; }
  std::vector<BasicTensor<T>>& m() { return m_; }
  std::vector<BasicTensor<T>>& v() { return v_; }
  const std::vector<BasicTensor<T>>& m() const { return m_; }
  const std::vector<BasicTensor<T>>& v() const { return v_; }

 private:
  AdamConfig cfg_;
  std::vector<NamedParam<T>> params_;
  std::vector<BasicTensor<T>> m_, v_;
};

// ---------------------------------------------------------------------------
// Augmentation

struct AugmentConfig {
  bool rotate = true;
  bool hflip = true;
  bool vflip = true;
  double max_angle = 30.0;  // degrees, uniform in [-max_angle, max_angle]
  double flip_prob = 0.5;
  /// Overrides the random angle when set.
  std::optional<double> fixed_angle;

  static AugmentConfig none() {
    AugmentConfig c;
    c.rotate = c.hflip = c.vflip = false;
    return c;
  }
};

/// Counter-clockwise rotation about the image centre, nearest-neighbour
/// sampling, zero fill outside the source.
Tensor rotate_nearest(const Tensor& x, double degrees);
Tensor flip_horizontal(const Tensor& x);
Tensor flip_vertical(const Tensor& x);

/// Draws one transform (angle, then hflip, then vflip; only for enabled
/// flags) and applies it to both image and mask.
SamplePair augment(const SamplePair& pair, const AugmentConfig& cfg, Rng& rng);

// ---------------------------------------------------------------------------
// Training loop

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 8;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  /// Final checkpoint (with optimizer state); "<path>.best" tracks the best
  /// logged Dice. Empty disables writing.
  std::string checkpoint_path;
  /// Append-only CSV `epoch,loss,dice,iou,seconds`. Empty disables logging.
  std::string log_path;
  std::size_t eval_every = 1;
  AugmentConfig augment;
  /// When false the seconds column is written as 0 so logs compare bytewise.
  bool record_time = true;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;
  /// Per-sample mean Dice / IoU on the validation set, or on the training
  /// set when no validation data is given. Unset on non-eval epochs.
  std::optional<double> dice, iou;
  double seconds = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  double best_dice = -1.0;
  std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// forward -> dice_loss -> backward -> Adam step over shuffled mini-batches.
/// A non-finite loss aborts with NonFiniteError naming the first non-finite
/// tensor found.
TrainResult train_loop(ULiteModel<float>& model, const std::vector<SamplePair>& train,
                       const std::vector<SamplePair>& val, const TrainConfig& cfg,
                       const EpochCallback& on_epoch = {});

std::string format_log_row(const EpochStats& s);
inline constexpr const char* kTrainLogHeader = "epoch,loss,dice,iou,seconds";

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace ulite
