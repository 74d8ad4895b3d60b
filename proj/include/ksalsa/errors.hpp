#pragma once

#include <stdexcept>
#include <string>

namespace ksalsa {

// Base of every error thrown by the library. The CLI maps ArgumentError to a
// usage failure and everything else to a runtime failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class CorruptionError : public Error {
 public:
  using Error::Error;
};

// A value went NaN/Inf during a numeric procedure.
class NumericError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

class ConvergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Input cannot be split into groups of exactly k.
class SizeError : public Error {
 public:
  using Error::Error;
};

// An operation was called before its prerequisites were set up.
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace ksalsa
