#pragma once

#include <stdexcept>
#include <string>

namespace dagsmooth {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CycleDetected : Error {
  using Error::Error;
};
struct IndexOutOfRange : Error {
  using Error::Error;
};
struct DuplicateEdge : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct NumericalInstability : Error {
  using Error::Error;
};
struct SpecMismatch : Error {
  using Error::Error;
};
struct AlignmentError : Error {
  using Error::Error;
};
struct ConstraintViolation : Error {
  using Error::Error;
};
struct InvalidRecipe : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

// I/O-layer errors. ParseError messages carry "<file>:<line>:".
struct ParseError : Error {
  using Error::Error;
};
struct MissingNode : Error {
  using Error::Error;
};
struct DuplicateNode : Error {
  using Error::Error;
};
struct OutOfRange : Error {
  using Error::Error;
};

}  // namespace dagsmooth
