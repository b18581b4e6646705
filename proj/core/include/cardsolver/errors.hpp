#pragma once

#include <stdexcept>
#include <string>

namespace cardsolver {

/// Base class for all solver errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

// Budget constraint k*l <= 1 <= k*u violated.
struct InvalidBounds : Error {
  using Error::Error;
};

// Equality rows linearly dependent beyond tolerance.
struct SingularKkt : Error {
  using Error::Error;
};

struct NearSingularQ : Error {
  using Error::Error;
};

struct RelaxationInfeasible : Error {
  using Error::Error;
};

struct EmptyPool : Error {
  using Error::Error;
};

struct DegenerateSpread : Error {
  using Error::Error;
};

struct TooLarge : Error {
  using Error::Error;
};

struct LengthMismatch : Error {
  using Error::Error;
};

struct NonpositiveReference : Error {
  using Error::Error;
};

struct OutOfRange : Error {
  using Error::Error;
};

struct NotPsd : Error {
  using Error::Error;
};

struct PipelineInfeasible : Error {
  using Error::Error;
};

struct DatasetMissing : Error {
  using Error::Error;
};

// Parse failure with 1-based line number.
struct ParseError : Error {
  ParseError(const std::string& what, long line) : Error(what + " (line " + std::to_string(line) + ")"), line_number(line) {}
  long line_number;
};

}  // namespace cardsolver
