// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace cycfuse {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

/// Declared sizes disagree with the bytes on disk.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Values violate a domain constraint (non-finite, negative, out of range).
class DataError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ModeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A metric has no defined value for the given inputs (e.g. zero-mean band).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

/// A loss became non-finite during optimization.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long failed_iter, long last_finite_iter)
      : Error(what), failed_iter_(failed_iter), last_finite_iter_(last_finite_iter) {}

  long failed_iter() const noexcept { return failed_iter_; }
  /// -1 when the very first evaluation was non-finite.
  long last_finite_iter() const noexcept { return last_finite_iter_; }

 private:
  long failed_iter_;
  long last_finite_iter_;
};

}  // namespace cycfuse
