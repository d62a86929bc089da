// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#include "ulite/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "ulite/data.hpp"

namespace ulite {

namespace {

constexpr std::size_t kMagicLen = sizeof(kCheckpointMagic) - 1;
const std::string kAdamM = "adam.m.";
const std::string kAdamV = "adam.v.";
const std::string kAdamT = "adam.t";

void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }
void put_u16(std::string& out, std::uint16_t v) {
  for (int i = 0; i < 2; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::span<const char> bytes) : b_(bytes) {}

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == b_.size(); }

  void need(std::size_t n, const char* what) {
    if (b_.size() - pos_ < n)
      throw LoadError("checkpoint truncated while reading " + std::string(what) + " at byte " +
                      std::to_string(pos_) + " (" + std::to_string(b_.size()) + " bytes total)");
  }
  std::uint64_t uint(int bytes, const char* what) {
    need(bytes, what);
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= std::uint64_t(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += bytes;
    return v;
  }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(b_.data() + pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const char> b_;
  std::size_t pos_ = 0;
};

std::string dims_str(const std::vector<std::uint32_t>& d) {
  std::string s = "(";
  for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
  return s + ")";
}

std::vector<std::uint32_t> dims_of(const Shape& s) {
  return {std::uint32_t(s.n), std::uint32_t(s.c), std::uint32_t(s.h), std::uint32_t(s.w)};
}

NamedTensor to_named(const std::string& name, const Tensor& t) {
  return {name, dims_of(t.shape()), std::vector<float>(t.data().begin(), t.data().end())};
}

void copy_into(const NamedTensor& src, Tensor& dst) {
  const auto want = dims_of(dst.shape());
  if (src.dims != want)
    throw LoadError("tensor '" + src.name + "': checkpoint dims " + dims_str(src.dims) + " do not match model dims " +
                    dims_str(want));
  std::copy(src.data.begin(), src.data.end(), dst.raw());
}

}  // namespace

const NamedTensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t;
  return nullptr;
}

std::size_t encoded_size(const Checkpoint& ckpt) {
  std::size_t n = kMagicLen + 4 + 4;
  for (const auto& t : ckpt.tensors) n += 2 + t.name.size() + 1 + 4 * t.dims.size() + 4 * t.data.size();
  return n;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string out;
  out.reserve(encoded_size(ckpt));
  out.append(kCheckpointMagic, kMagicLen);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    if (t.name.size() > 0xffff) throw Error("tensor name too long: " + t.name.substr(0, 64) + "...");
    if (t.dims.size() > 0xff) throw Error("tensor '" + t.name + "' has too many dims");
    std::size_t numel = 1;
    for (auto d : t.dims) numel *= d;
    if (numel != t.data.size())
      throw Error("tensor '" + t.name + "': dims " + dims_str(t.dims) + " disagree with " +
                  std::to_string(t.data.size()) + " values");
    put_u16(out, static_cast<std::uint16_t>(t.name.size()));
    out += t.name;
    put_u8(out, static_cast<std::uint8_t>(t.dims.size()));
    for (auto d : t.dims) put_u32(out, d);
    for (float f : t.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

Checkpoint decode_checkpoint(std::span<const char> bytes) {
  Reader r(bytes);
  if (bytes.size() < kMagicLen || r.str(kMagicLen, "magic") != std::string(kCheckpointMagic, kMagicLen))
    throw LoadError("not a checkpoint: bad magic bytes");
  const auto version = r.uint(4, "version");
  if (version != kCheckpointVersion)
    throw LoadError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  const auto count = r.uint(4, "tensor count");
  Checkpoint ckpt;
  std::set<std::string> names;
  for (std::uint64_t k = 0; k < count; ++k) {
    NamedTensor t;
    const auto len = r.uint(2, "name length");
    t.name = r.str(len, "tensor name");
    if (!names.insert(t.name).second) throw LoadError("duplicate tensor '" + t.name + "' in checkpoint");
    const auto rank = r.uint(1, "rank");
    std::uint64_t numel = 1;
    for (std::uint64_t i = 0; i < rank; ++i) {
      t.dims.push_back(static_cast<std::uint32_t>(r.uint(4, "dims")));
      numel *= t.dims.back();
    }
    if (numel > (bytes.size() - r.pos()) / 4)
      throw LoadError("checkpoint truncated: tensor '" + t.name + "' " + dims_str(t.dims) + " needs " +
                      std::to_string(numel * 4) + " bytes, " + std::to_string(bytes.size() - r.pos()) + " left");
    t.data.resize(numel);
    for (auto& f : t.data) f = std::bit_cast<float>(static_cast<std::uint32_t>(r.uint(4, "payload")));
    ckpt.tensors.push_back(std::move(t));
  }
  if (!r.done())
    throw LoadError("checkpoint has " + std::to_string(bytes.size() - r.pos()) + " trailing bytes after " +
                    std::to_string(count) + " tensors");
  return ckpt;
}

Checkpoint capture(const ULiteModel<float>& model, const Adam<float>* adam) {
  Checkpoint ckpt;
  model.visit([&](const std::string& name, const Tensor& value, bool) { ckpt.tensors.push_back(to_named(name, value)); });
  if (adam) {
    const auto& ps = adam->params();
    for (std::size_t k = 0; k < ps.size(); ++k) ckpt.tensors.push_back(to_named(kAdamM + ps[k].name, adam->m()[k]));
    for (std::size_t k = 0; k < ps.size(); ++k) ckpt.tensors.push_back(to_named(kAdamV + ps[k].name, adam->v()[k]));
    ckpt.tensors.push_back({kAdamT, {}, {static_cast<float>(adam->t)}});
  }
  return ckpt;
}

void restore(ULiteModel<float>& model, const Checkpoint& ckpt, Adam<float>* adam) {
  std::set<std::string> model_names;
  model.visit([&](const std::string& name, Tensor& value, Tensor*) {
    model_names.insert(name);
    const NamedTensor* t = ckpt.find(name);
    if (!t) throw LoadError("checkpoint is missing tensor '" + name + "' " + dims_str(dims_of(value.shape())));
    copy_into(*t, value);
  });
  for (const auto& t : ckpt.tensors) {
    if (t.name.starts_with("adam.")) continue;
    if (!model_names.count(t.name))
      throw LoadError("checkpoint tensor '" + t.name + "' " + dims_str(t.dims) + " has no counterpart in the model");
  }
  if (!adam) return;
  const NamedTensor* t = ckpt.find(kAdamT);
  if (!t) return;
  if (!t->dims.empty() || t->data.size() != 1) throw LoadError("tensor 'adam.t' must be a scalar");
  const auto& ps = adam->params();
  for (std::size_t k = 0; k < ps.size(); ++k) {
    for (auto [prefix, dst] : {std::pair{&kAdamM, &adam->m()[k]}, std::pair{&kAdamV, &adam->v()[k]}}) {
      const NamedTensor* mt = ckpt.find(*prefix + ps[k].name);
      if (!mt) throw LoadError("checkpoint is missing optimizer tensor '" + *prefix + ps[k].name + "'");
      copy_into(*mt, *dst);
    }
  }
  adam->t = static_cast<std::uint64_t>(t->data[0]);
}

void save_checkpoint(const ULiteModel<float>& model, const std::string& path, const Adam<float>* adam) {
  write_file_atomic(path, encode_checkpoint(capture(model, adam)));
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open checkpoint '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const LoadError& e) {
    throw LoadError(path + ": " + e.what());
  }
}

ULiteModel<float> load_checkpoint(const std::string& path, const ModelConfig& cfg) {
  ULiteModel<float> model(cfg);
  try {
    restore(model, read_checkpoint(path));
  } catch (const LoadError& e) {
    const std::string msg = e.what();
    if (msg.starts_with(path)) throw;
    throw LoadError(path + ": " + msg);
  }
  return model;
}

}  // namespace ulite
