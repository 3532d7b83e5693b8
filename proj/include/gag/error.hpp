#pragma once

#include <stdexcept>
#include <string>

namespace gag {

// Base class for every error the library throws.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration value (zero dimension, empty catalog, bad divisor).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Item or user id outside the current catalog.
class CatalogError : public Error {
 public:
  using Error::Error;
};

// Tensor or graph dimension mismatch.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Unreadable or malformed input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf encountered where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// API misuse: stale activations, unnormalized distributions, empty inputs.
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace gag
