#pragma once

#include <stdexcept>
#include <string>

namespace fedsim {

// Error taxonomy. Everything derives from Error so callers can catch the
// whole family or a specific kind.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Dimension or layout mismatch between tensors/models.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Caller violated an argument precondition.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Malformed external data (IDX files, manifests).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

// NaN/Inf where finite values were required.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Invalid or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Partitioning could not produce a usable split (retries exhausted).
class PartitionError : public Error {
 public:
  explicit PartitionError(const std::string& msg) : Error(msg) {}
};

// All aggregation weights collapsed to zero.
class DegenerateScoreError : public Error {
 public:
  explicit DegenerateScoreError(const std::string& msg) : Error(msg) {}
};

}  // namespace fedsim
