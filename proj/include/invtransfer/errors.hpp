#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace invtransfer {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A decision vector lies outside the problem's box.
class BoundsError : public Error {
public:
  BoundsError(std::size_t index, double value, double lower, double upper);
  std::size_t index() const { return index_; }

private:
  std::size_t index_;
};

/// Matrix factorization failed even after jitter escalation.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Mismatched vector/matrix dimensions.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Inputs outside a function's mathematical domain (non-positive objectives,
/// off-simplex preferences, degenerate variance).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Invalid configuration, detected before any evaluation happens.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Malformed file contents.
class ParseError : public Error {
public:
  using Error::Error;
};

/// Well-formed file whose contents violate a data invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

} // namespace invtransfer
