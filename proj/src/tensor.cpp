// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#include "ulite/tensor.hpp"

#include <algorithm>

namespace ulite {

std::string Shape::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (!(a == b)) throw ShapeError(std::string(op) + ": shape mismatch " + a.str() + " vs " + b.str());
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape) : shape_(shape) {
  if (!shape.valid()) throw ShapeError("tensor dims must all be >= 1, got " + shape.str());
  data_.assign(shape.numel(), T(0));
}

template <typename T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
  if (!shape.valid()) throw ShapeError("tensor dims must all be >= 1, got " + shape.str());
  if (data_.size() != shape.numel())
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match dims " + shape.str());
}

template <typename T>
void BasicTensor<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

template <typename T>
BasicTensor<T> rand_normal(Shape shape, Rng& rng, double mean, double std) {
  if (std < 0.0) throw InvalidInputError("rand_normal: std must be >= 0");
  BasicTensor<T> t(shape);
  for (auto& v : t.data()) v = static_cast<T>(mean + std * rng.normal());
  return t;
}

template <typename T>
BasicTensor<T> rand_uniform(Shape shape, Rng& rng, double lo, double hi) {
  BasicTensor<T> t(shape);
  for (auto& v : t.data()) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "mul");
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a[i] * b[i];
  return out;
}

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& a, T s) {
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a[i] * s;
  return out;
}

template <typename T>
BasicTensor<T> map_unary(const BasicTensor<T>& a, const std::function<T(T)>& f) {
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = f(a[i]);
  return out;
}

template <typename T>
void accumulate(BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "accumulate");
  T* pa = a.raw();
  const T* pb = b.raw();
  for (std::size_t i = 0; i < a.numel(); ++i) pa[i] += pb[i];
}

template <typename T>
MulGrads<T> mul_backward(const BasicTensor<T>& a, const BasicTensor<T>& b, const BasicTensor<T>& dy) {
  require_same_shape(a.shape(), dy.shape(), "mul_backward");
  return {mul(dy, b), mul(dy, a)};
}

template <typename T>
BasicTensor<T> scale_backward(const BasicTensor<T>& dy, T s) {
  return scale(dy, s);
}

template <typename T>
BasicTensor<T> map_unary_backward(const BasicTensor<T>& a, const BasicTensor<T>& dy,
                                  const std::function<T(T)>& df) {
  require_same_shape(a.shape(), dy.shape(), "map_unary_backward");
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = dy[i] * df(a[i]);
  return out;
}

template <typename T>
T sum(const BasicTensor<T>& a) {
  double acc = 0.0;
  for (T v : a.data()) acc += static_cast<double>(v);
  return static_cast<T>(acc);
}

template <typename T>
bool all_finite(const BasicTensor<T>& a) {
  return std::all_of(a.data().begin(), a.data().end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
void check_finite(const BasicTensor<T>& a, const std::string& what) {
  const auto d = a.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i]))
      throw NonFiniteError("non-finite value " + std::to_string(d[i]) + " in '" + what + "' at flat index " +
                           std::to_string(i));
  }
}

#define ULITE_INSTANTIATE(T)                                                                          \
  template class BasicTensor<T>;                                                                      \
  template BasicTensor<T> rand_normal<T>(Shape, Rng&, double, double);                                \
  template BasicTensor<T> rand_uniform<T>(Shape, Rng&, double, double);                               \
  template BasicTensor<T> add<T>(const BasicTensor<T>&, const BasicTensor<T>&);                       \
  template BasicTensor<T> mul<T>(const BasicTensor<T>&, const BasicTensor<T>&);                       \
  template BasicTensor<T> scale<T>(const BasicTensor<T>&, T);                                         \
  template BasicTensor<T> map_unary<T>(const BasicTensor<T>&, const std::function<T(T)>&);            \
  template void accumulate<T>(BasicTensor<T>&, const BasicTensor<T>&);                                \
  template MulGrads<T> mul_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&,                  \
                                       const BasicTensor<T>&);                                        \
  template BasicTensor<T> scale_backward<T>(const BasicTensor<T>&, T);                                \
  template BasicTensor<T> map_unary_backward<T>(const BasicTensor<T>&, const BasicTensor<T>&,         \
                                                const std::function<T(T)>&);                          \
  template T sum<T>(const BasicTensor<T>&);                                                           \
  template bool all_finite<T>(const BasicTensor<T>&);                                                 \
  template void check_finite<T>(const BasicTensor<T>&, const std::string&);

ULITE_INSTANTIATE(float)
ULITE_INSTANTIATE(double)

#undef ULITE_INSTANTIATE

}  // namespace ulite
