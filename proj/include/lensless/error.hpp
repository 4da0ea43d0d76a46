#pragma once

#include <stdexcept>
#include <string>

namespace lensless {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A computation produced a value outside its numeric contract (NaN, divergence, residue).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// An operation was called on an object that is not in the required state.
class StateError : public Error {
 public:
  using Error::Error;
};

/// The requested inverse problem has no unique solution.
class IllPosedError : public Error {
 public:
  using Error::Error;
};

/// Raised by the run-configuration layer; carries the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what) : Error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace lensless
