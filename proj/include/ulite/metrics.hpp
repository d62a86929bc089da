// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ulite/data.hpp"
#include "ulite/model.hpp"

namespace ulite {

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
};

struct DiceIou {
  double dice = 0.0, iou = 0.0;
};

/// pred >= threshold -> 1, else 0.
template <typename T>
BasicTensor<T> binarize(const BasicTensor<T>& pred, double threshold = 0.5);

/// Both inputs must hold only 0/1 values (InvalidInputError otherwise).
/// Only the `n`-th batch item is counted when `n` is given.
ConfusionCounts confusion(const Tensor& pred_bin, const Tensor& gt_bin);
ConfusionCounts confusion(const Tensor& pred_bin, const Tensor& gt_bin, std::size_t n);

/// Dice = (2TP + eps) / (2TP + FP + FN + eps), IoU = (TP + eps) / (TP + FP + FN + eps).
/// `strict` drops eps from the numerators, which scores empty-vs-empty as 0.
DiceIou dice_iou(const ConfusionCounts& c, double eps = 1e-5, bool strict = false);
DiceIou dice_iou(const Tensor& pred_bin, const Tensor& gt_bin, double eps = 1e-5, bool strict = false);

struct EvalOptions {
  double threshold = 0.5;
  double eps = 1e-5;
  bool strict = false;
  /// Score the pooled confusion counts instead of averaging per-sample scores.
  bool global = false;
  std::size_t batch_size = 4;
  bool keep_masks = false;
};

struct SampleScore {
  std::string id;
  double dice = 0.0, iou = 0.0;
};

struct EvalReport {
  std::vector<SampleScore> samples;
  double dice = 0.0, iou = 0.0;
  /// Binary predicted masks (1,1,H,W), filled when EvalOptions::keep_masks.
  std::vector<Tensor> masks;

  /// `sample_id,dice,iou` rows followed by a `mean` row.
  std::string csv() const;
};

/// Eval-mode scoring; the model is not modified.
EvalReport evaluate(const ULiteModel<float>& model, const std::vector<SamplePair>& data, const EvalOptions& opts = {});

/// Stacks images (and masks) of data[first, first + count) into one batch.
Tensor stack_images(const std::vector<SamplePair>& data, const std::vector<std::size_t>& indices);
Tensor stack_masks(const std::vector<SamplePair>& data, const std::vector<std::size_t>& indices);

}  // namespace ulite
