// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <cstring>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ulite/error.hpp"
#include "ulite/rng.hpp"

namespace ulite {

/// NCHW extents. A default-constructed Shape is the empty placeholder used
/// for not-yet-populated caches; every tensor produced by an op has all
/// extents >= 1.
struct Shape {
  std::size_t n = 0, c = 0, h = 0, w = 0;

  std::size_t numel() const { return n * c * h * w; }
  std::size_t plane() const { return h * w; }
  bool valid() const { return n > 0 && c > 0 && h > 0 && w > 0; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// Rank-4 row-major NCHW array. Value semantics: copies are deep.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  /// Zero-filled. Throws ShapeError when any extent is 0.
  explicit BasicTensor(Shape shape);
  BasicTensor(Shape shape, std::vector<T> data);

  const Shape& shape() const { return shape_; }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  T* raw() { return data_.data(); }
  const T* raw() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t offset(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return ((n * shape_.c + c) * shape_.h + h) * shape_.w + w;
  }
  T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) { return data_[offset(n, c, h, w)]; }
  const T& at(std::size_t n, std::size_t c, std::size_t h, std::size_t w) const {
    return data_[offset(n, c, h, w)];
  }

  /// Pointer to the H*W plane of (n, c).
  T* plane(std::size_t n, std::size_t c) { return data_.data() + (n * shape_.c + c) * shape_.plane(); }
  const T* plane(std::size_t n, std::size_t c) const {
    return data_.data() + (n * shape_.c + c) * shape_.plane();
  }

  void fill(T v);
  template <typename U>
  BasicTensor<U> cast() const {
    BasicTensor<U> out(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool operator==(const BasicTensor&) const = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

/// A learnable array and its gradient accumulator.
template <typename T>
struct Param {
  BasicTensor<T> value;
  BasicTensor<T> grad;

  Param() = default;
  explicit Param(BasicTensor<T> v) : value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { grad.fill(T(0)); }
  std::size_t numel() const { return value.numel(); }
};

template <typename T>
struct NamedParam {
  std::string name;
  Param<T>* param;
};

/// True when both tensors have the same shape and identical bit patterns.
template <typename T>
bool bit_equal(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return a.shape() == b.shape() && std::memcmp(a.raw(), b.raw(), a.numel() * sizeof(T)) == 0;
}

template <typename T>
BasicTensor<T> zeros(Shape shape) {
  return BasicTensor<T>(shape);
}

template <typename T>
BasicTensor<T> full(Shape shape, T value) {
  BasicTensor<T> t(shape);
  t.fill(value);
  return t;
}

/// I.i.d. Gaussian draws in row-major order. std must be >= 0.
template <typename T>
BasicTensor<T> rand_normal(Shape shape, Rng& rng, double mean, double std);

/// Uniform draws in [lo, hi).
template <typename T>
BasicTensor<T> rand_uniform(Shape shape, Rng& rng, double lo, double hi);

// Elementwise arithmetic. Binary ops require identical shapes.
template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T s);
template <typename T>
BasicTensor<T> map_unary(const BasicTensor<T>& a, const std::function<T(T)>& f);

/// a += b in place.
template <typename T>
void accumulate(BasicTensor<T>& a, const BasicTensor<T>& b);

// Backward passes: given dL/dy, return dL/d(input). add passes dy through
// unchanged to both inputs, so it has no dedicated function.
template <typename T>
struct MulGrads {
  BasicTensor<T> da, db;
};
template <typename T>
MulGrads<T> mul_backward(const BasicTensor<T>& a, const BasicTensor<T>& b, const BasicTensor<T>& dy);
template <typename T>
BasicTensor<T> scale_backward(const BasicTensor<T>& dy, T s);
/// df is the derivative of the mapped function evaluated at the input.
template <typename T>
BasicTensor<T> map_unary_backward(const BasicTensor<T>& a, const BasicTensor<T>& dy,
                                  const std::function<T(T)>& df);

template <typename T>
T sum(const BasicTensor<T>& a);

template <typename T>
bool all_finite(const BasicTensor<T>& a);

/// Throws NonFiniteError naming `what` when any element is NaN/Inf.
template <typename T>
void check_finite(const BasicTensor<T>& a, const std::string& what);

void require_same_shape(const Shape& a, const Shape& b, const char* op);

}  // namespace ulite
