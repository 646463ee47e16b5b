#pragma once

#include <stdexcept>
#include <string>

namespace topicaux {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad flag values, inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// File contents do not match the expected layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Shapes or sizes of inputs disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf encountered during optimization.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace topicaux
