#pragma once

#include <stdexcept>
#include <string>

namespace microevent {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or missing input data (dumps, CSV/TSV/JSON artifacts).
class InputError : public Error {
 public:
  using Error::Error;
};

// Configuration rejected before any work starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numerical failure inside a model fit.
class FitError : public Error {
 public:
  using Error::Error;
};

}  // namespace microevent
