// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ulite {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor dims that violate an op's shape contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Even-length or otherwise unsupported convolution kernel.
class UnsupportedKernelError : public Error {
 public:
  using Error::Error;
};

/// Values outside an op's domain, e.g. a non-binary mask.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// A tensor picked up a NaN or Inf.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration text; line() is 1-based, 0 when not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& msg, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Checkpoint or image decoding failure.
class LoadError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ulite
