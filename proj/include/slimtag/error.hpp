#pragma once

#include <stdexcept>
#include <string>

namespace slimtag {

// Error taxonomy mirrored by the CLI exit codes: usage/config problems exit
// with 1, data validation with 2, numeric divergence with 3, I/O with 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace slimtag
