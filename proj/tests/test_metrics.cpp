// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "ulite/metrics.hpp"
#include "ulite/train.hpp"

using namespace ulite;

namespace {

Tensor random_mask(Rng& rng, Shape s, double p) {
  Tensor t(s);
  for (auto& v : t.data()) v = rng.bernoulli(p) ? 1.0f : 0.0f;
  return t;
}

}  // namespace

TEST_CASE("binarize thresholds inclusively") {
  const Tensor p({1, 1, 1, 4}, {0.2f, 0.5f, 0.7f, 0.49f});
  CHECK(binarize(p) == Tensor({1, 1, 1, 4}, {0, 1, 1, 0}));
  CHECK(binarize(p, 0.6) == Tensor({1, 1, 1, 4}, {0, 0, 1, 0}));
}

TEST_CASE("confusion counts") {
  const Tensor p({2, 1, 1, 3}, {1, 1, 0, 0, 1, 0});
  const Tensor g({2, 1, 1, 3}, {1, 0, 1, 0, 1, 1});
  const ConfusionCounts all = confusion(p, g);
  CHECK(all.tp == 2);
  CHECK(all.fp == 1);
  CHECK(all.fn == 2);
  CHECK(all.tn == 1);
  CHECK(all.total() == 6);
  const ConfusionCounts second = confusion(p, g, 1);
  CHECK(second.tp == 1);
  CHECK(second.fn == 1);
  CHECK(second.tn == 1);
  CHECK_THROWS_AS(confusion(p, g, 2), ShapeError);
  CHECK_THROWS_AS(confusion(Tensor({1, 1, 1, 1}, {0.5f}), Tensor({1, 1, 1, 1})), InvalidInputError);
}

TEST_CASE("dice and iou against hand counts") {
  ConfusionCounts c;
  c.tp = 3;
  c.fp = 1;
  c.fn = 2;
  const DiceIou d = dice_iou(c, 0.0);
  CHECK(d.dice == doctest::Approx(6.0 / 9.0));
  CHECK(d.iou == doctest::Approx(3.0 / 6.0));

  // both masks empty: smoothed score is 1, strict score is 0
  const ConfusionCounts empty;
  CHECK(dice_iou(empty).dice == doctest::Approx(1.0));
  CHECK(dice_iou(empty).iou == doctest::Approx(1.0));
  CHECK(dice_iou(empty, 1e-5, true).dice == 0.0);

  // strict form keeps eps only in the denominator
  const DiceIou s = dice_iou(c, 1e-5, true);
  CHECK(s.dice == doctest::Approx(6.0 / (9.0 + 1e-5)));
}

TEST_CASE("metric identities on random masks") {
  Rng rng(21);
  for (int i = 0; i < 300; ++i) {
    const Shape s{1, 1, 1 + rng.below(12), 1 + rng.below(12)};
    const double density = rng.uniform(0.05, 0.95);
    const Tensor a = random_mask(rng, s, density), b = random_mask(rng, s, density);
    const ConfusionCounts c = confusion(a, b);
    if (c.tp + c.fp + c.fn == 0) continue;
    const DiceIou d = dice_iou(c, 0.0);
    CHECK(std::abs(d.iou - d.dice / (2.0 - d.dice)) <= 1e-6);
    CHECK(d.iou >= 0.0);
    CHECK(d.iou <= d.dice);
    CHECK(d.dice <= 1.0);
    CHECK(dice_loss(a, a).loss == 0.0);
  }
}

TEST_CASE("evaluate scores a model per sample") {
  ModelConfig cfg;
  cfg.widths = {4, 4, 4, 4, 4, 4};
  cfg.bottleneck_width = 4;
  ULiteModel<float> model(cfg);
  model.set_mode(Mode::eval);
  const auto data = synth_dataset(5, 1, 64);

  EvalOptions opts;
  opts.batch_size = 2;
  opts.keep_masks = true;
  const EvalReport rep = evaluate(model, data, opts);
  REQUIRE(rep.samples.size() == 5);
  CHECK(rep.masks.size() == 5);
  double sum = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(rep.samples[i].id == data[i].id);
    const auto single = binarize(model.infer(data[i].image));
    CHECK(bit_equal(rep.masks[i], single));
    const DiceIou d = dice_iou(single, data[i].mask);
    CHECK(rep.samples[i].dice == d.dice);
    sum += d.dice;
  }
  CHECK(rep.dice == doctest::Approx(sum / 5));

  opts.global = true;
  const EvalReport g = evaluate(model, data, opts);
  ConfusionCounts pooled;
  for (std::size_t i = 0; i < 5; ++i) pooled += confusion(rep.masks[i], data[i].mask);
  CHECK(g.dice == doctest::Approx(dice_iou(pooled).dice));

  const std::string csv = rep.csv();
  CHECK(csv.starts_with("sample_id,dice,iou\nsynth_0000,"));
  CHECK(csv.find("\nmean,") != std::string::npos);
  CHECK_THROWS_AS(evaluate(model, {}), InvalidInputError);
}

TEST_CASE("stacking checks shapes") {
  auto data = synth_dataset(2, 0, 16);
  const Tensor x = stack_images(data, {1, 0});
  CHECK(x.shape() == Shape{2, 3, 16, 16});
  CHECK(x.at(0, 2, 5, 5) == data[1].image.at(0, 2, 5, 5));
  data[1].mask = Tensor({1, 1, 8, 8});
  CHECK_THROWS_AS(stack_masks(data, {0, 1}), ShapeError);
  CHECK_THROWS_AS(stack_images(data, {}), InvalidInputError);
}
