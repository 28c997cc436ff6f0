#pragma once

#include <stdexcept>
#include <string>

namespace latch {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller-supplied argument (negative sigma, bit count not a multiple of 8, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A sampling footprint (window, patch, disc) leaves its raster.
class BoundsError : public Error {
 public:
  using Error::Error;
};

// Malformed image or arrangement/descriptor file content.
class DecodeError : public Error {
 public:
  using Error::Error;
};

// Arrangement set and extraction options disagree.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Dataset directory is missing files or holds inconsistent data.
class LoadError : public Error {
 public:
  using Error::Error;
};

// A metric is undefined for the given input (e.g. no ground truth).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace latch
