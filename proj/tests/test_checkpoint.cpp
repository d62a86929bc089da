// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstring>

#include "doctest.h"
#include "support/tempdir.hpp"
#include "ulite/checkpoint.hpp"

using namespace ulite;
using namespace ulite::testing;

namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.widths = {4, 4, 8, 8, 8, 8};
  cfg.bottleneck_width = 8;
  return cfg;
}

}  // namespace

TEST_CASE("encoding layout") {
  Checkpoint c;
  c.tensors.push_back({"w", {2, 1}, {1.5f, -2.0f}});
  c.tensors.push_back({"t", {}, {3.0f}});
  const std::string bytes = encode_checkpoint(c);
  CHECK(bytes.size() == encoded_size(c));
  CHECK(bytes.starts_with("ULITECKPT1"));
  // version 1, 2 tensors, little endian
  CHECK(bytes.substr(10, 8) == std::string("\x01\x00\x00\x00\x02\x00\x00\x00", 8));
  // first record: name length 1, "w", rank 2, dims 2 and 1, then payload
  CHECK(bytes.substr(18, 4) == std::string("\x01\x00w\x02", 4));
  CHECK(bytes.substr(22, 8) == std::string("\x02\x00\x00\x00\x01\x00\x00\x00", 8));
  float f;
  std::memcpy(&f, bytes.data() + 30, 4);
  CHECK(f == 1.5f);
  CHECK(decode_checkpoint(bytes) == c);
}

TEST_CASE("decode rejects malformed input") {
  Checkpoint c;
  c.tensors.push_back({"a", {3}, {1, 2, 3}});
  const std::string good = encode_checkpoint(c);

  std::string bad = good;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad), LoadError);
  bad = good;
  bad[10] = 2;
  CHECK_THROWS_WITH_AS(decode_checkpoint(bad), doctest::Contains("version"), LoadError);
  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{12}, std::size_t{20}, good.size() - 1})
    CHECK_THROWS_AS(decode_checkpoint(std::string_view(good).substr(0, cut)), LoadError);
  CHECK_THROWS_WITH_AS(decode_checkpoint(good + "x"), doctest::Contains("trailing"), LoadError);

  Checkpoint dup;
  dup.tensors.push_back({"a", {1}, {1}});
  dup.tensors.push_back({"a", {1}, {2}});
  CHECK_THROWS_WITH_AS(decode_checkpoint(encode_checkpoint(dup)), doctest::Contains("duplicate"), LoadError);

  Checkpoint wrong;
  wrong.tensors.push_back({"a", {2}, {1}});
  CHECK_THROWS_AS(encode_checkpoint(wrong), Error);
}

TEST_CASE("model save, load, save is byte identical") {
  TempDir dir("ckpt");
  ULiteModel<float> model(small_config());
  // perturb running statistics so buffers carry information
  Rng rng(2);
  model.forward(rand_uniform<float>({2, 3, 64, 64}, rng, 0, 1));
  save_checkpoint(model, dir.file("a.ckpt"));
  const ULiteModel<float> loaded = load_checkpoint(dir.file("a.ckpt"), small_config());
  save_checkpoint(loaded, dir.file("b.ckpt"));
  CHECK(slurp(dir.file("a.ckpt")) == slurp(dir.file("b.ckpt")));

  const Tensor x = rand_uniform<float>({1, 3, 64, 64}, rng, 0, 1);
  model.set_mode(Mode::eval);
  CHECK(bit_equal(model.infer(x), loaded.infer(x)));
}

TEST_CASE("optimizer state round trips") {
  ULiteModel<float> model(small_config());
  Adam<float> adam(model.parameters());
  Rng rng(0);
  const Tensor x = rand_uniform<float>({1, 3, 64, 64}, rng, 0, 1);
  Tensor gt({1, 1, 64, 64});
  for (std::size_t i = 0; i < gt.numel(); i += 3) gt[i] = 1.0f;
  for (int s = 0; s < 2; ++s) {
    adam.zero_grad();
    model.backward(dice_loss(model.forward(x), gt).grad);
    adam.step();
  }
  const Checkpoint ck = capture(model, &adam);
  REQUIRE(ck.find("adam.t") != nullptr);
  CHECK(ck.find("adam.t")->dims.empty());
  CHECK(ck.find("adam.m.stem.pw.weight") != nullptr);
  CHECK(ck.find("adam.v.head.bias") != nullptr);

  ULiteModel<float> other(small_config());
  Adam<float> other_adam(other.parameters());
  restore(other, ck, &other_adam);
  CHECK(other_adam.t == 2);
  for (std::size_t i = 0; i < adam.m().size(); ++i) {
    CHECK(bit_equal(adam.m()[i], other_adam.m()[i]));
    CHECK(bit_equal(adam.v()[i], other_adam.v()[i]));
  }
  CHECK(encode_checkpoint(capture(other, &other_adam)) == encode_checkpoint(ck));
}

TEST_CASE("config mismatch names the tensor") {
  TempDir dir("mismatch");
  ULiteModel<float> model(small_config());
  save_checkpoint(model, dir.file("m.ckpt"));

  ModelConfig wider = small_config();
  wider.widths[0] = 6;
  CHECK_THROWS_WITH_AS(load_checkpoint(dir.file("m.ckpt"), wider), doctest::Contains("stem"), LoadError);

  ModelConfig square = small_config();
  square.dw_variant = DwVariant::square;
  CHECK_THROWS_WITH_AS(load_checkpoint(dir.file("m.ckpt"), square), doctest::Contains("missing tensor"), LoadError);

  CHECK_THROWS_AS(load_checkpoint(dir.file("none.ckpt"), small_config()), LoadError);
  spit(dir.file("short.ckpt"), slurp(dir.file("m.ckpt")).substr(0, 40));
  CHECK_THROWS_WITH_AS(load_checkpoint(dir.file("short.ckpt"), small_config()), doctest::Contains("short.ckpt"),
                       LoadError);
}
