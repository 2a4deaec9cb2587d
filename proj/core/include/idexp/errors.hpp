#pragma once

#include <stdexcept>
#include <string>

namespace idexp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operand sizes disagree (e.g. latent length vs. basis width).
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A count or index argument is outside its admissible range.
class RangeError : public Error {
public:
  using Error::Error;
};

/// A value violates a domain invariant (non-finite entry, non-positive stddev, ...).
class InvalidValue : public Error {
public:
  using Error::Error;
};

/// A basis has no usable rank, or a combined basis is numerically rank deficient.
class DegenerateSubspace : public Error {
public:
  using Error::Error;
};

// Container errors.
class CorruptModel : public Error {
public:
  using Error::Error;
};

class UnsupportedVersion : public Error {
public:
  using Error::Error;
};

class MalformedManifest : public Error {
public:
  using Error::Error;
};

}  // namespace idexp
