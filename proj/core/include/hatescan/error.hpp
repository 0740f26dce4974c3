#pragma once

#include <stdexcept>
#include <string>

namespace hatescan {

// Base for every failure raised by the library. The CLI maps ConfigError
// (and ParameterError) to exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration: missing files, bad config keys, mismatched artifacts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An argument outside the documented domain of an operation.
class ParameterError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// A class cannot be apportioned across a split or fold plan.
class StratificationError : public DataError {
 public:
  using DataError::DataError;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hatescan
