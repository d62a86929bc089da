// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#include "ulite/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>

#include "ulite/checkpoint.hpp"
#include "ulite/metrics.hpp"

namespace ulite {

// ---------------------------------------------------------------------------
// Dice loss

template <typename T>
DiceLossResult<T> dice_loss(const BasicTensor<T>& pred, const BasicTensor<T>& gt, const DiceLossConfig& cfg) {
  require_same_shape(pred.shape(), gt.shape(), "dice_loss");
  if (!(cfg.smooth > 0.0)) throw InvalidInputError("dice_loss: smooth must be > 0");
  double inter = 0.0, denom = 0.0;
  for (std::size_t i = 0; i < gt.numel(); ++i) {
    const T g = gt[i];
    if (g != T(0) && g != T(1))
      throw InvalidInputError("dice_loss: ground truth must be binary, found " + std::to_string(double(g)) +
                              " at index " + std::to_string(i));
    inter += double(g) * double(pred[i]);
    denom += double(g) + double(pred[i]);
  }
  const double s = cfg.smooth;
  const double num = 2.0 * inter + s;
  const double den = denom + s;
  DiceLossResult<T> out;
  out.loss = 1.0 - num / den;
  out.grad = BasicTensor<T>(pred.shape());
  const double inv_den2 = 1.0 / (den * den);
  for (std::size_t i = 0; i < gt.numel(); ++i)
    out.grad[i] = static_cast<T>(-(2.0 * double(gt[i]) * den - num) * inv_den2);
  return out;
}

template DiceLossResult<float> dice_loss(const Tensor&, const Tensor&, const DiceLossConfig&);
template DiceLossResult<double> dice_loss(const TensorD&, const TensorD&, const DiceLossConfig&);

// ---------------------------------------------------------------------------
// Adam

template <typename T>
Adam<T>::Adam(std::vector<NamedParam<T>> params, AdamConfig cfg) : cfg_(cfg), params_(std::move(params)) {
  for (const auto& p : params_) {
    m_.emplace_back(p.param->value.shape());
    v_.emplace_back(p.param->value.shape());
  }
}

template <typename T>
void Adam<T>::step() {
  ++t;
  const double b1 = cfg_.beta1, b2 = cfg_.beta2;
  const double c1 = 1.0 - std::pow(b1, double(t));
  const double c2 = 1.0 - std::pow(b2, double(t));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    BasicTensor<T>& w = params_[k].param->value;
    const BasicTensor<T>& g = params_[k].param->grad;
    BasicTensor<T>& m = m_[k];
    BasicTensor<T>& v = v_[k];
    for (std::size_t i = 0; i < w.numel(); ++i) {
      const double gi = g[i];
      const double mi = b1 * double(m[i]) + (1.0 - b1) * gi;
      const double vi = b2 * double(v[i]) + (1.0 - b2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = cfg_.lr * (mi / c1) / (std::sqrt(vi / c2) + cfg_.eps);
      w[i] = static_cast<T>(double(w[i]) - update);
    }
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto& p : params_) p.param->zero_grad();
}

template class Adam<float>;
template class Adam<double>;

// ---------------------------------------------------------------------------
// Augmentation

namespace {

double snap(double v) {
  if (std::abs(v) < 1e-12) return 0.0;
  if (std::abs(v - 1.0) < 1e-12) return 1.0;
  if (std::abs(v + 1.0) < 1e-12) return -1.0;
  return v;
}

}  // namespace

Tensor rotate_nearest(const Tensor& x, double degrees) {
  const Shape s = x.shape();
  const double rad = degrees * std::numbers::pi / 180.0;
  const double c = snap(std::cos(rad)), sn = snap(std::sin(rad));
  const double cy = (double(s.h) - 1.0) / 2.0, cx = (double(s.w) - 1.0) / 2.0;
  // Source index per output pixel, shared by all planes; -1 means fill.
  std::vector<std::ptrdiff_t> src(s.plane(), -1);
  for (std::size_t y = 0; y < s.h; ++y) {
    for (std::size_t xo = 0; xo < s.w; ++xo) {
      const double dy = double(y) - cy, dx = double(xo) - cx;
      const double sy = std::floor(cy + c * dy + sn * dx + 0.5);
      const double sx = std::floor(cx - sn * dy + c * dx + 0.5);
      if (sy < 0 || sx < 0 || sy >= double(s.h) || sx >= double(s.w)) continue;
      src[y * s.w + xo] = static_cast<std::ptrdiff_t>(sy) * std::ptrdiff_t(s.w) + static_cast<std::ptrdiff_t>(sx);
    }
  }
  Tensor out(s);
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t ch = 0; ch < s.c; ++ch) {
      const float* in = x.plane(n, ch);
      float* o = out.plane(n, ch);
      for (std::size_t i = 0; i < src.size(); ++i) o[i] = src[i] < 0 ? 0.0f : in[src[i]];
    }
  return out;
}

Tensor flip_horizontal(const Tensor& x) {
  const Shape s = x.shape();
  Tensor out(s);
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t h = 0; h < s.h; ++h)
        for (std::size_t w = 0; w < s.w; ++w) out.at(n, c, h, w) = x.at(n, c, h, s.w - 1 - w);
  return out;
}

Tensor flip_vertical(const Tensor& x) {
  const Shape s = x.shape();
  Tensor out(s);
  for (std::size_t n = 0; n < s.n; ++n)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t h = 0; h < s.h; ++h)
        std::copy_n(x.plane(n, c) + (s.h - 1 - h) * s.w, s.w, out.plane(n, c) + h * s.w);
  return out;
}

SamplePair augment(const SamplePair& pair, const AugmentConfig& cfg, Rng& rng) {
  if (pair.image.shape().h != pair.mask.shape().h || pair.image.shape().w != pair.mask.shape().w)
    throw ShapeError("augment: image " + pair.image.shape().str() + " and mask " + pair.mask.shape().str() +
                     " differ spatially");
  std::optional<double> angle;
  if (cfg.rotate) angle = cfg.fixed_angle ? *cfg.fixed_angle : rng.uniform(-cfg.max_angle, cfg.max_angle);
  const bool h = cfg.hflip && rng.bernoulli(cfg.flip_prob);
  const bool v = cfg.vflip && rng.bernoulli(cfg.flip_prob);

  SamplePair out = pair;
  auto apply = [&](Tensor& t) {
    if (angle) t = rotate_nearest(t, *angle);
    if (h) t = flip_horizontal(t);
    if (v) t = flip_vertical(t);
  };
  apply(out.image);
  apply(out.mask);
  return out;
}

// ---------------------------------------------------------------------------
// Training loop

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be a finite non-negative number");
}

std::string format_log_row(const EpochStats& s) {
  char buf[160];
  auto opt = [](const std::optional<double>& v) {
    if (!v) return std::string();
    char b[32];
    std::snprintf(b, sizeof b, "%.6f", *v);
    return std::string(b);
  };
  std::snprintf(buf, sizeof buf, "%zu,%.8f,%s,%s,%.3f", s.epoch, s.loss, opt(s.dice).c_str(), opt(s.iou).c_str(),
                s.seconds);
  return buf;
}

namespace {

std::string first_non_finite(ULiteModel<float>& model, const Tensor& input, const Tensor& pred) {
  if (!all_finite(input)) return "input batch";
  std::string found;
  model.visit([&](const std::string& name, Tensor& value, Tensor* grad) {
    if (!found.empty()) return;
    if (!all_finite(value)) found = name;
    else if (grad && !all_finite(*grad)) found = name + ".grad";
  });
  if (!found.empty()) return found;
  if (!all_finite(pred)) return "prediction";
  return "loss";
}

void open_log(const std::string& path) {
  if (path.empty()) return;
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  if (!fresh) return;
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot open training log '" + path + "'");
  out << kTrainLogHeader << "\n";
}

void append_log(const std::string& path, const EpochStats& s) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot append to training log '" + path + "'");
  out << format_log_row(s) << "\n";
  if (!out) throw IoError("write failed for training log '" + path + "'");
}

}  // namespace

TrainResult train_loop(ULiteModel<float>& model, const std::vector<SamplePair>& train,
                       const std::vector<SamplePair>& val, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.empty()) throw InvalidInputError("train_loop: training set is empty");

  Adam<float> adam(model.parameters(), AdamConfig{.lr = cfg.lr});
  const Rng base(cfg.seed);
  const std::vector<SamplePair>& scored = val.empty() ? train : val;
  open_log(cfg.log_path);

  TrainResult result;
  std::vector<std::size_t> order(train.size());
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    model.set_mode(Mode::train);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = base.fork(2 * epoch);
    Rng aug_rng = base.fork(2 * epoch + 1);
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - first);
      std::vector<SamplePair> batch;
      batch.reserve(count);
      for (std::size_t k = 0; k < count; ++k) batch.push_back(augment(train[order[first + k]], cfg.augment, aug_rng));
      std::vector<std::size_t> idx(count);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      const Tensor x = stack_images(batch, idx);
      const Tensor y = stack_masks(batch, idx);

      adam.zero_grad();
      const Tensor pred = model.forward(x);
      const auto loss = dice_loss(pred, y);
      if (!std::isfinite(loss.loss))
        throw NonFiniteError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batches + 1) + "; first non-finite tensor: " +
                             first_non_finite(model, x, pred));
      model.backward(loss.grad);
      adam.step();
      loss_sum += loss.loss;
      ++batches;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = loss_sum / double(batches);
    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) {
      const EvalReport rep = evaluate(model, scored);
      stats.dice = rep.dice;
      stats.iou = rep.iou;
      if (rep.dice > result.best_dice) {
        result.best_dice = rep.dice;
        result.best_epoch = epoch;
        if (!cfg.checkpoint_path.empty()) save_checkpoint(model, cfg.checkpoint_path + ".best", &adam);
      }
    }
    if (cfg.record_time)
      stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    append_log(cfg.log_path, stats);
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  model.set_mode(Mode::train);
  if (!cfg.checkpoint_path.empty()) save_checkpoint(model, cfg.checkpoint_path, &adam);
  return result;
}

}  // namespace ulite
