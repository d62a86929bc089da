// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ulite/tensor.hpp"

namespace ulite {

/// One training example: image (1,3,S,S) in [0,1], mask (1,1,S,S) in {0,1}.
struct SamplePair {
  Tensor image;
  Tensor mask;
  std::string id;
};

/// 8-bit interleaved pixels.
struct Image8 {
  std::size_t width = 0, height = 0, channels = 0;
  std::vector<std::uint8_t> pixels;
};

/// Decodes an 8-bit PNG as gray (1 channel) or RGB (3 channels); alpha is
/// dropped. Throws LoadError with the path on failure.
Image8 read_png(const std::string& path);
/// Writes 1- or 3-channel 8-bit PNG atomically (temp file + rename).
void write_png(const std::string& path, const Image8& img);

/// Half-pixel-centre bilinear resize of every plane, clamped to [0, 1].
Tensor resize_bilinear(const Tensor& x, std::size_t height, std::size_t width);
Tensor resize_nearest(const Tensor& x, std::size_t height, std::size_t width);

/// (1,3,size,size) in [0,1]; gray is replicated to RGB.
Tensor load_image(const std::string& path, std::size_t size = 256);

/// Image scaled by 1/255 and bilinearly resized (gray is replicated to RGB);
/// mask resized nearest-neighbour then thresholded at 128.
SamplePair load_pair(const std::string& image_path, const std::string& mask_path, std::size_t size = 256,
                     std::string id = {});

Image8 tensor_to_image(const Tensor& x, std::size_t n = 0);
/// Binary mask -> 0/255 gray image.
Image8 mask_to_image(const Tensor& mask, std::size_t n = 0);

enum class Split { unassigned, train, val, test };
std::string to_string(Split s);
Split parse_split(const std::string& s);

struct ManifestEntry {
  std::string id;
  std::string image;  // paths relative to the manifest root, or absolute
  std::string mask;
  Split split = Split::unassigned;
};

struct DatasetManifest {
  std::string root;
  std::vector<ManifestEntry> entries;

  std::string image_path(const ManifestEntry& e) const;
  std::string mask_path(const ManifestEntry& e) const;
  std::vector<ManifestEntry> select(Split s) const;
};

/// `root/manifest.csv` (columns id,image,mask,split) when present,
/// otherwise `root/images/*.png` paired with `root/masks/*.png` by stem.
DatasetManifest scan_dataset(const std::string& root);
DatasetManifest read_manifest_csv(const std::string& path, const std::string& root);
void write_manifest_csv(const std::string& path, const DatasetManifest& manifest);

struct SplitRatios {
  double train = 1.0, val = 0.0, test = 0.0;
};

/// Seeded shuffle, then val = floor(val * n), test = floor(test * n) and
/// train takes the remainder. Ratios must be non-negative and sum to 1.
DatasetManifest make_splits(const DatasetManifest& manifest, SplitRatios ratios, std::uint64_t seed);

std::vector<SamplePair> load_samples(const DatasetManifest& manifest, const std::vector<ManifestEntry>& entries,
                                     std::size_t size = 256);

/// Seeded stand-in dataset: 1-3 filled ellipses over a noisy background;
/// the mask is the exact ellipse union.
std::vector<SamplePair> synth_dataset(std::size_t count, std::uint64_t seed, std::size_t size = 256);

/// Materializes pairs under `root/images` and `root/masks` (PNG) plus a
/// manifest.csv with unassigned splits.
DatasetManifest write_dataset(const std::string& root, const std::vector<SamplePair>& pairs);

/// Writes bytes to `path` through a sibling temp file and rename, so the
/// final path never holds a partial file.
void write_file_atomic(const std::string& path, const std::string& bytes);

}  // namespace ulite
