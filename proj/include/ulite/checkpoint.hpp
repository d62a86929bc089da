// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ulite/model.hpp"
#include "ulite/train.hpp"

// Binary layout, all integers little-endian:
//
//   "ULITECKPT1"                      10 bytes
//   version                           u32
//   tensor count                      u32
//   per tensor:
//     name length                     u16
//     name                            UTF-8 bytes
//     rank                            u8
//     dims                            u32 x rank
//     payload                         f32 x prod(dims), row-major
//
// Optimizer state, when present, follows the model tensors in the same list
// as "adam.m.<param>", "adam.v.<param>" and the rank-0 scalar "adam.t".

namespace ulite {

inline constexpr char kCheckpointMagic[] = "ULITECKPT1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  bool operator==(const NamedTensor&) const = default;
};

struct Checkpoint {
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(const std::string& name) const;
  bool operator==(const Checkpoint&) const = default;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
/// Throws LoadError on bad magic, unknown version, truncation or trailing bytes.
Checkpoint decode_checkpoint(std::span<const char> bytes);
/// Exact encoded size: header + sum of per-tensor records.
std::size_t encoded_size(const Checkpoint& ckpt);

/// Model tensors in visit order, then the optimizer section when `adam` is given.
Checkpoint capture(const ULiteModel<float>& model, const Adam<float>* adam = nullptr);
/// Copies every model tensor from `ckpt`. Missing names or dims that differ
/// from the model's raise LoadError naming the tensor and both shapes.
/// Optimizer state is restored when both `adam` and the section exist.
void restore(ULiteModel<float>& model, const Checkpoint& ckpt, Adam<float>* adam = nullptr);

void save_checkpoint(const ULiteModel<float>& model, const std::string& path, const Adam<float>* adam = nullptr);
Checkpoint read_checkpoint(const std::string& path);
/// Builds a model from `cfg` and restores `path` into it.
ULiteModel<float> load_checkpoint(const std::string& path, const ModelConfig& cfg);

}  // namespace ulite
