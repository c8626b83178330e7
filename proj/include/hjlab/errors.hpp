#pragma once

#include <stdexcept>
#include <string>

namespace hjlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid model/run configuration (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The conjugation argmax hit the edge of the search box.
class RadiusTooSmallError : public Error {
 public:
  using Error::Error;
};

/// Non-finite action encountered while optimizing a curve.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A certified search ran out of budget before reaching its tolerance.
class SearchFailure : public Error {
 public:
  using Error::Error;
};

/// A construction ran into a state its invariants rule out.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

class GridTooNarrowError : public Error {
 public:
  using Error::Error;
};

}  // namespace hjlab
