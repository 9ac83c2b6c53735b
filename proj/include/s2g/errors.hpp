#pragma once

#include <stdexcept>
#include <string>

namespace s2g {

/// Tensor extents or feature widths do not fit the operation.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// NaN/inf where finite values are required.
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A set with too few elements for the requested operation.
class EmptySetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Geometric predicate too close to zero to decide; callers resample.
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Misuse of the autodiff tape (non-scalar root, reuse after backward, ...).
class TapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Bad configuration or malformed input file; message carries the key path.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace s2g
