#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mbss {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (bad argument, bad config).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed or inconsistent.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Feature dimension of the input does not match the model or vocabulary.
class DimensionError : public DataError {
 public:
  DimensionError(std::size_t expected, std::size_t actual)
      : DataError("dimension mismatch: expected d=" + std::to_string(expected) +
                  ", got d=" + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// Numerical failure, e.g. a covariance that stays indefinite after
/// the maximum regularization.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace mbss
