// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>

#include "doctest.h"
#include "support/oracles.hpp"
#include "ulite/model.hpp"

using namespace ulite;
using namespace ulite::testing;

namespace {

template <typename T>
std::size_t walked_learnables(ULiteModel<T>& m) {
  std::size_t total = 0;
  m.visit([&](const std::string&, BasicTensor<T>& v, BasicTensor<T>* g) {
    if (g) total += v.numel();
  });
  return total;
}

}  // namespace

TEST_CASE("parameter count matches the closed form for every grid variant") {
  for (const ModelConfig& cfg : list_variants()) {
    INFO(cfg.variant_name());
    const ParamTable table = count_params(cfg);
    CHECK(table.total() == cf_model(cfg));
    CHECK(table.total() < 1'000'000);
    ULiteModel<float> model(cfg);
    CHECK(walked_learnables(model) == table.total());
    CHECK(count_params(model) == table);
  }
  CHECK(list_variants().size() == 12);
}

TEST_CASE("default model size") {
  const ParamTable t = count_params(ModelConfig{});
  CHECK(t.total() == 607'447);
  CHECK(t.rows.size() == 13);
  const std::string text = t.render();
  CHECK(text.find("total") != std::string::npos);
  CHECK(text.find("607447") != std::string::npos);
}

TEST_CASE("square kernels cost more than axial pairs at every n") {
  for (std::size_t n : {3, 5, 7}) {
    ModelConfig a, s;
    a.n = s.n = n;
    s.dw_variant = DwVariant::square;
    CHECK(count_params(s).total() > count_params(a).total());
  }
  CHECK(axial_module_param_count(16, 32, 1, DwVariant::axial) > axial_module_param_count(16, 32, 1, DwVariant::square));
}

TEST_CASE("config parsing") {
  const ModelConfig cfg = parse_config(
      "# comment\n"
      "widths = 8, 16, 32, 64, 128, 256\n"
      "n = 5\n"
      "dw_variant = square  # trailing\n"
      "addc = false\n"
      "bottleneck_width = 64\n"
      "seed = 3\n");
  CHECK(cfg.widths[5] == 256);
  CHECK(cfg.n == 5);
  CHECK(cfg.dw_variant == DwVariant::square);
  CHECK_FALSE(cfg.addc);
  CHECK(cfg.bottleneck_width == 64);
  CHECK(cfg.seed == 3);
  CHECK(parse_config(format_config(cfg)) == cfg);
  CHECK(parse_config("") == ModelConfig{});
  CHECK(cfg.variant_name() == "square-n5-noaddc");
}

TEST_CASE("config errors carry line numbers") {
  auto line_of = [](const char* text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(line_of("n = 5\nn = 7\n") == 2);
  CHECK(line_of("\n\nbogus = 1\n") == 3);
  CHECK(line_of("n = 4\n") == 1);
  CHECK(line_of("widths = 1,2,3\n") == 1);
  CHECK(line_of("dw_variant = round\n") == 1);
  CHECK(line_of("addc = maybe\n") == 1);
  CHECK(line_of("n 5\n") == 1);
  CHECK_THROWS_AS(load_config("/nonexistent/ulite.cfg"), IoError);
}

TEST_CASE("forward produces probabilities at input resolution") {
  ModelConfig cfg;
  cfg.widths = {4, 4, 8, 8, 8, 8};
  cfg.bottleneck_width = 8;
  ULiteModel<float> model(cfg);
  Rng rng(1);
  const auto x = rand_uniform<float>({2, 3, 64, 128}, rng, 0, 1);
  const auto y = model.forward(x);
  REQUIRE(y.shape() == Shape{2, 1, 64, 128});
  for (float v : y.data()) {
    CHECK(v > 0.0f);
    CHECK(v < 1.0f);
  }
  CHECK(model.features().size() == 6);

  model.set_mode(Mode::eval);
  CHECK(bit_equal(model.forward(x), model.infer(x)));
  CHECK_FALSE(bit_equal(model.infer(x), model.infer(x, 0)));
  CHECK_THROWS_AS(model.infer(x, 5), InvalidInputError);
}

TEST_CASE("input dims are validated") {
  CHECK_NOTHROW(check_input_dims({1, 3, 64, 64}));
  CHECK_THROWS_AS(check_input_dims({1, 1, 64, 64}), ShapeError);
  CHECK_THROWS_AS(check_input_dims({1, 3, 96, 64}), ShapeError);
}

TEST_CASE("model init is seeded") {
  ModelConfig cfg;
  cfg.widths = {4, 4, 4, 4, 4, 4};
  cfg.bottleneck_width = 4;
  ULiteModel<float> a(cfg), b(cfg);
  cfg.seed = 1;
  ULiteModel<float> c(cfg);
  bool same_ab = true, same_ac = true;
  auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
  REQUIRE(pa.size() == pc.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    same_ab = same_ab && bit_equal(pa[i].param->value, pb[i].param->value);
    same_ac = same_ac && bit_equal(pa[i].param->value, pc[i].param->value);
    CHECK(pa[i].name == pb[i].name);
  }
  CHECK(same_ab);
  CHECK_FALSE(same_ac);
}

TEST_CASE("axial module equals its manual composition") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    auto m = AxialDWModule<float>::make(3, 4, 7, DwVariant::axial, rng);
    const auto x = rand_normal<float>({2, 3, 9, 9}, rng, 0, 1);
    BatchNorm<float> bn = m.bn;
    const auto manual =
        gelu(pointwise_conv(batch_norm(add(add(x, depthwise_conv(x, m.dw[0])), depthwise_conv(x, m.dw[1])), bn), m.pw));
    CHECK(bit_equal(m.forward(x), manual));
  }
}

TEST_CASE("bottleneck branch layout") {
  Rng rng(0);
  auto b = BottleneckBlock<float>::make(8, 4, true, rng);
  REQUIRE(b.branches.size() == 3);
  for (int d = 1; d <= 3; ++d) {
    CHECK(b.branches[d - 1][0].dilation == d);
    CHECK(b.branches[d - 1][0].kernel_w() == 3);
    CHECK(b.branches[d - 1][1].kernel_h() == 3);
  }
  CHECK(b.param_count() == cf_bottleneck(8, 4, true));
  auto single = BottleneckBlock<float>::make(8, 4, false, rng);
  REQUIRE(single.branches.size() == 1);
  CHECK(single.branches[0][0].kernel_w() == 7);
  CHECK(single.param_count() == cf_bottleneck(8, 4, false));
}

TEST_CASE("footprints") {
  {
    const Footprint f = module_footprint(7, DwVariant::axial);
    CHECK(f.cells == cross_mask(f.size, 3));
    CHECK(f.count() == 13);
    CHECK(f.at(0, 3));
    CHECK_FALSE(f.at(1, 1));
  }
  {
    const Footprint f = module_footprint(7, DwVariant::square);
    CHECK(f.cells == square_mask(f.size, 3));
  }
  {
    const Footprint f = module_footprint(3, DwVariant::square);
    CHECK(f.cells == square_mask(f.size, 1));
  }
  {
    const Footprint f = module_footprint(1, DwVariant::axial);
    CHECK(f.count() == 1);
    CHECK(f.at(0, 0));
  }
  for (int d = 1; d <= 3; ++d) {
    const Footprint f = dilated_branch_footprint(d);
    CHECK(f.cells == dilated_taps_mask(f.size, d));
  }
  CHECK_THROWS_AS(module_footprint(4, DwVariant::axial), UnsupportedKernelError);
  CHECK_THROWS_AS(dilated_branch_footprint(4), InvalidInputError);
}
