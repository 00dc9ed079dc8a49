#pragma once

#include <stdexcept>
#include <string>

namespace neumann {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A linear combination references a basis element that is not bound yet.
struct UnboundBasisError : Error {
  using Error::Error;
};

/// Structural problem in a circuit or its serialized form.
struct CircuitError : Error {
  using Error::Error;
};

/// (1 - z) f(z) = 1 + O(z^m) fails beyond the allowed tolerance.
struct PrefixConditionError : Error {
  using Error::Error;
};

/// An operation that needs an exact (spillover-free, rational) kernel got
/// something else.
struct ApproximateKernelError : Error {
  using Error::Error;
};

struct UnsupportedRadixError : Error {
  using Error::Error;
};

struct DimensionError : Error {
  using Error::Error;
};

}  // namespace neumann
