#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rlc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Attribute type outside the supported numeric subset.
class UnsupportedAttributeError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent user configuration (bad target count, missing file, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Out-of-range algorithm parameter (k, r, folds, alpha, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Least-squares system without full column rank.
class RankDeficientError : public Error {
 public:
  using Error::Error;
};

/// A target whose test values all equal the training mean, so RRMSE is 0/0.
class DegenerateTargetError : public Error {
 public:
  DegenerateTargetError(const std::string& what, std::size_t target)
      : Error(what), target_(target) {}
  std::size_t target() const { return target_; }

 private:
  std::size_t target_;
};

}  // namespace rlc
