// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>

#include "doctest.h"
#include "support/tempdir.hpp"
#include "ulite/data.hpp"

using namespace ulite;
using namespace ulite::testing;

TEST_CASE("png round trip") {
  TempDir dir("png");
  Image8 img{3, 2, 3, {}};
  for (std::size_t i = 0; i < 18; ++i) img.pixels.push_back(static_cast<std::uint8_t>(i * 13));
  write_png(dir.file("a.png"), img);
  const Image8 back = read_png(dir.file("a.png"));
  CHECK(back.width == 3);
  CHECK(back.height == 2);
  CHECK(back.channels == 3);
  CHECK(back.pixels == img.pixels);

  CHECK_THROWS_AS(read_png(dir.file("missing.png")), LoadError);
  spit(dir.file("junk.png"), "not a png");
  CHECK_THROWS_AS(read_png(dir.file("junk.png")), LoadError);
  CHECK_THROWS_AS(write_png(dir.file("b.png"), Image8{2, 2, 2, std::vector<std::uint8_t>(8)}), InvalidInputError);
}

TEST_CASE("resizing") {
  const Tensor x({1, 1, 2, 2}, {0.0f, 0.25f, 0.5f, 1.0f});
  CHECK(bit_equal(resize_bilinear(x, 2, 2), x));
  const Tensor up = resize_nearest(x, 4, 4);
  CHECK(up.at(0, 0, 0, 0) == 0.0f);
  CHECK(up.at(0, 0, 3, 3) == 1.0f);
  CHECK(up.at(0, 0, 1, 2) == 0.25f);
  const Tensor b = resize_bilinear(x, 4, 4);
  for (float v : b.data()) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
  // half-pixel centres: output (1, 1) sits a quarter pixel from input (0, 0)
  CHECK(b.at(0, 0, 1, 1) == doctest::Approx(0.5625 * 0.0 + 0.1875 * 0.25 + 0.1875 * 0.5 + 0.0625 * 1.0));
  // a constant image stays constant
  const Tensor c = resize_bilinear(full<float>({1, 3, 5, 7}, 0.25f), 9, 4);
  for (float v : c.data()) CHECK(v == doctest::Approx(0.25f));
}

TEST_CASE("loading pairs normalises images and binarises masks") {
  TempDir dir("pair");
  Image8 gray{4, 4, 1, {}};
  for (std::size_t i = 0; i < 16; ++i) gray.pixels.push_back(static_cast<std::uint8_t>(i * 17));
  write_png(dir.file("img.png"), gray);
  Image8 mask{4, 4, 1, std::vector<std::uint8_t>(16, 0)};
  mask.pixels[5] = 127;
  mask.pixels[6] = 128;
  mask.pixels[7] = 255;
  write_png(dir.file("mask.png"), mask);

  const SamplePair p = load_pair(dir.file("img.png"), dir.file("mask.png"), 4, "x");
  CHECK(p.id == "x");
  REQUIRE(p.image.shape() == Shape{1, 3, 4, 4});
  CHECK(p.image.at(0, 0, 3, 3) == doctest::Approx(1.0f));
  CHECK(p.image.at(0, 2, 0, 1) == doctest::Approx(17.0f / 255.0f));
  CHECK(p.mask[5] == 0.0f);
  CHECK(p.mask[6] == 1.0f);
  CHECK(p.mask[7] == 1.0f);

  const SamplePair big = load_pair(dir.file("img.png"), dir.file("mask.png"), 16, "y");
  CHECK(big.mask.shape() == Shape{1, 1, 16, 16});
  for (float v : big.mask.data()) CHECK((v == 0.0f || v == 1.0f));
}

TEST_CASE("synthetic data is seeded and well formed") {
  const auto a = synth_dataset(3, 4, 32), b = synth_dataset(3, 4, 32), c = synth_dataset(3, 5, 32);
  REQUIRE(a.size() == 3);
  CHECK(a[2].id == "synth_0002");
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(bit_equal(a[i].image, b[i].image));
    CHECK(bit_equal(a[i].mask, b[i].mask));
    float fg = 0;
    for (float v : a[i].mask.data()) {
      CHECK((v == 0.0f || v == 1.0f));
      fg += v;
    }
    CHECK(fg > 0);
    CHECK(fg < 32 * 32);
  }
  CHECK_FALSE(bit_equal(a[0].image, c[0].image));
  CHECK_THROWS_AS(synth_dataset(0, 0, 32), InvalidInputError);
}

TEST_CASE("dataset directory round trip") {
  TempDir dir("ds");
  const auto pairs = synth_dataset(4, 1, 16);
  const DatasetManifest written = write_dataset(dir.path().string(), pairs);
  CHECK(written.entries.size() == 4);
  CHECK(std::filesystem::exists(dir.path() / "images" / "synth_0000.png"));
  CHECK(std::filesystem::exists(dir.path() / "masks" / "synth_0003.png"));

  const DatasetManifest m = scan_dataset(dir.path().string());
  REQUIRE(m.entries.size() == 4);
  const auto loaded = load_samples(m, m.entries, 16);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(loaded[i].id == pairs[i].id);
    CHECK(bit_equal(loaded[i].mask, pairs[i].mask));
    for (std::size_t k = 0; k < pairs[i].image.numel(); ++k)
      CHECK(std::abs(loaded[i].image[k] - pairs[i].image[k]) <= 0.5f / 255.0f + 1e-6f);
  }

  // without a manifest the layout is discovered from images/ and masks/
  std::filesystem::remove(dir.path() / "manifest.csv");
  const DatasetManifest scanned = scan_dataset(dir.path().string());
  CHECK(scanned.entries.size() == 4);
  CHECK(scanned.entries[1].id == "synth_0001");

  std::filesystem::remove(dir.path() / "masks" / "synth_0002.png");
  CHECK_THROWS_AS(scan_dataset(dir.path().string()), IoError);
  CHECK_THROWS_AS(scan_dataset(dir.file("nowhere")), IoError);
}

TEST_CASE("manifest parsing and splits") {
  TempDir dir("man");
  spit(dir.file("m.csv"), "id,image,mask,split\na,i/a.png,m/a.png,train\nb,i/b.png,m/b.png,test\nc,/abs/c.png,m/c.png,\n");
  const DatasetManifest m = read_manifest_csv(dir.file("m.csv"), "/root");
  REQUIRE(m.entries.size() == 3);
  CHECK(m.entries[1].split == Split::test);
  CHECK(m.entries[2].split == Split::unassigned);
  CHECK(m.image_path(m.entries[0]) == "/root/i/a.png");
  CHECK(m.image_path(m.entries[2]) == "/abs/c.png");
  CHECK(m.select(Split::train).size() == 1);

  write_manifest_csv(dir.file("m2.csv"), m);
  const DatasetManifest again = read_manifest_csv(dir.file("m2.csv"), "/root");
  CHECK(again.entries.size() == 3);
  CHECK(again.entries[0].split == Split::train);

  spit(dir.file("bad.csv"), "name,path\n");
  CHECK_THROWS_AS(read_manifest_csv(dir.file("bad.csv"), "/"), InvalidInputError);
  spit(dir.file("bad2.csv"), "id,image,mask,split\na,b\n");
  CHECK_THROWS_AS(read_manifest_csv(dir.file("bad2.csv"), "/"), InvalidInputError);
  spit(dir.file("bad3.csv"), "id,image,mask,split\na,b,c,holdout\n");
  CHECK_THROWS_AS(read_manifest_csv(dir.file("bad3.csv"), "/"), InvalidInputError);

  DatasetManifest ten;
  for (int i = 0; i < 10; ++i) ten.entries.push_back({std::to_string(i), "", "", Split::unassigned});
  const DatasetManifest s = make_splits(ten, {0.7, 0.2, 0.1}, 3);
  CHECK(s.select(Split::train).size() == 7);
  CHECK(s.select(Split::val).size() == 2);
  CHECK(s.select(Split::test).size() == 1);
  const DatasetManifest s2 = make_splits(ten, {0.7, 0.2, 0.1}, 3);
  for (std::size_t i = 0; i < 10; ++i) CHECK(s.entries[i].split == s2.entries[i].split);
  CHECK_THROWS_AS(make_splits(ten, {0.5, 0.2, 0.1}, 0), InvalidInputError);
}

TEST_CASE("atomic writes replace whole files") {
  TempDir dir("atomic");
  write_file_atomic(dir.file("f"), "first");
  write_file_atomic(dir.file("f"), "second");
  CHECK(slurp(dir.file("f")) == "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++entries;
  CHECK(entries == 1);  // no stray temporary
  write_file_atomic(dir.file("new/dir/f"), "x");
  CHECK(slurp(dir.file("new/dir/f")) == "x");
  CHECK_THROWS_AS(write_file_atomic(dir.file("f/under_a_file"), "x"), IoError);
}
