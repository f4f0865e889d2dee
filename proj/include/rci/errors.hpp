#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rci {

/// Base class for every error raised by the library. `category()` is a short
/// machine-parseable tag that the CLI prints before the message.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual std::string_view category() const noexcept = 0;
};

/// Invalid argument values or mismatched dimensions.
class ParameterError : public Error {
 public:
  using Error::Error;
  std::string_view category() const noexcept override { return "parameter"; }
};

/// Numerically degenerate data: constant columns, collinear pairs.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
  std::string_view category() const noexcept override { return "degenerate"; }
};

/// Malformed user-supplied input such as a CSV with a non-binary label column.
class InputError : public Error {
 public:
  using Error::Error;
  std::string_view category() const noexcept override { return "input"; }
};

/// A metric that has no defined value for the given input.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
  std::string_view category() const noexcept override { return "metric"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  std::string_view category() const noexcept override { return "io"; }
};

namespace detail {

template <typename E>
inline void require(bool ok, const std::string& what) {
  if (!ok) throw E(what);
}

}  // namespace detail
}  // namespace rci
