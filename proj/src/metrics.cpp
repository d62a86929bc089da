// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#include "ulite/metrics.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

namespace ulite {

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

template <typename T>
BasicTensor<T> binarize(const BasicTensor<T>& pred, double threshold) {
  BasicTensor<T> out(pred.shape());
  for (std::size_t i = 0; i < pred.numel(); ++i) out[i] = double(pred[i]) >= threshold ? T(1) : T(0);
  return out;
}

template Tensor binarize(const Tensor&, double);
template TensorD binarize(const TensorD&, double);

namespace {

ConfusionCounts count_range(const float* p, const float* g, std::size_t len) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < len; ++i) {
    if ((p[i] != 0.0f && p[i] != 1.0f) || (g[i] != 0.0f && g[i] != 1.0f))
      throw InvalidInputError("confusion: inputs must be binary (0/1), found pred=" + std::to_string(p[i]) +
                              " gt=" + std::to_string(g[i]) + " at index " + std::to_string(i));
    const bool pp = p[i] == 1.0f, gg = g[i] == 1.0f;
    if (pp && gg) ++c.tp;
    else if (pp) ++c.fp;
    else if (gg) ++c.fn;
    else ++c.tn;
  }
  return c;
}

}  // namespace

ConfusionCounts confusion(const Tensor& pred_bin, const Tensor& gt_bin) {
  require_same_shape(pred_bin.shape(), gt_bin.shape(), "confusion");
  return count_range(pred_bin.raw(), gt_bin.raw(), pred_bin.numel());
}

ConfusionCounts confusion(const Tensor& pred_bin, const Tensor& gt_bin, std::size_t n) {
  require_same_shape(pred_bin.shape(), gt_bin.shape(), "confusion");
  const Shape s = pred_bin.shape();
  if (n >= s.n) throw ShapeError("confusion: batch index " + std::to_string(n) + " out of range for " + s.str());
  const std::size_t len = s.c * s.plane();
  return count_range(pred_bin.raw() + n * len, gt_bin.raw() + n * len, len);
}

DiceIou dice_iou(const ConfusionCounts& c, double eps, bool strict) {
  const double tp = double(c.tp), fp = double(c.fp), fn = double(c.fn);
  const double num_eps = strict ? 0.0 : eps;
  return {(2.0 * tp + num_eps) / (2.0 * tp + fp + fn + eps), (tp + num_eps) / (tp + fp + fn + eps)};
}

DiceIou dice_iou(const Tensor& pred_bin, const Tensor& gt_bin, double eps, bool strict) {
  return dice_iou(confusion(pred_bin, gt_bin), eps, strict);
}

Tensor stack_images(const std::vector<SamplePair>& data, const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw InvalidInputError("stack_images: no samples");
  const Shape s0 = data.at(indices[0]).image.shape();
  Tensor out(Shape{indices.size(), s0.c, s0.h, s0.w});
  const std::size_t len = s0.c * s0.plane();
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Tensor& img = data.at(indices[k]).image;
    if (img.shape() != s0)
      throw ShapeError("stack_images: sample '" + data[indices[k]].id + "' has shape " + img.shape().str() +
                       ", expected " + s0.str());
    std::copy_n(img.raw(), len, out.raw() + k * len);
  }
  return out;
}

Tensor stack_masks(const std::vector<SamplePair>& data, const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw InvalidInputError("stack_masks: no samples");
  const Shape s0 = data.at(indices[0]).mask.shape();
  Tensor out(Shape{indices.size(), s0.c, s0.h, s0.w});
  const std::size_t len = s0.c * s0.plane();
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Tensor& m = data.at(indices[k]).mask;
    if (m.shape() != s0)
      throw ShapeError("stack_masks: sample '" + data[indices[k]].id + "' has shape " + m.shape().str() +
                       ", expected " + s0.str());
    std::copy_n(m.raw(), len, out.raw() + k * len);
  }
  return out;
}

EvalReport evaluate(const ULiteModel<float>& model, const std::vector<SamplePair>& data, const EvalOptions& opts) {
  if (data.empty()) throw InvalidInputError("evaluate: dataset is empty");
  const std::size_t bs = std::max<std::size_t>(1, opts.batch_size);
  EvalReport rep;
  ConfusionCounts pooled;
  double dice_sum = 0.0, iou_sum = 0.0;
  for (std::size_t first = 0; first < data.size(); first += bs) {
    std::vector<std::size_t> idx(std::min(bs, data.size() - first));
    std::iota(idx.begin(), idx.end(), first);
    const Tensor pred = binarize(model.infer(stack_images(data, idx)), opts.threshold);
    const Tensor gt = stack_masks(data, idx);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const ConfusionCounts c = confusion(pred, gt, k);
      pooled += c;
      const DiceIou s = dice_iou(c, opts.eps, opts.strict);
      rep.samples.push_back({data[idx[k]].id, s.dice, s.iou});
      dice_sum += s.dice;
      iou_sum += s.iou;
      if (opts.keep_masks) {
        const Shape ps = pred.shape();
        Tensor m(Shape{1, ps.c, ps.h, ps.w});
        std::copy_n(pred.raw() + k * m.numel(), m.numel(), m.raw());
        rep.masks.push_back(std::move(m));
      }
    }
  }
  if (opts.global) {
    const DiceIou g = dice_iou(pooled, opts.eps, opts.strict);
    rep.dice = g.dice;
    rep.iou = g.iou;
  } else {
    rep.dice = dice_sum / double(data.size());
    rep.iou = iou_sum / double(data.size());
  }
  return rep;
}

std::string EvalReport::csv() const {
  std::ostringstream os;
  char buf[64];
  os << "sample_id,dice,iou\n";
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", s.dice, s.iou);
    os << s.id << "," << buf << "\n";
  }
  std::snprintf(buf, sizeof buf, "%.6f,%.6f", dice, iou);
  os << "mean," << buf << "\n";
  return os.str();
}

}  // namespace ulite
