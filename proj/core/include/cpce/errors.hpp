#pragma once

#include <stdexcept>
#include <string>

namespace cpce {

// Base class for all library errors so callers can catch one type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input shape: wrong columns, ragged rows, empty table.
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error(what) {}
};

// Values that violate the data contract: non-finite covariates or outcomes,
// s/z entries outside {0,1}.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(what) {}
};

// A (z, s) cell required by an operation contains no observations.
class EmptyCellError : public Error {
 public:
  explicit EmptyCellError(const std::string& what) : Error(what) {}
};

// Invalid or inconsistent configuration (bad option combinations, bad
// field values, unusable estimator/fold pairings).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// An iterative fit failed to converge within its iteration budget.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error(what) {}
};

// A binary-response fit received labels that are all 0 or all 1.
class DegenerateLabelsError : public Error {
 public:
  explicit DegenerateLabelsError(const std::string& what) : Error(what) {}
};

// Treatment-arm selection probabilities violate p1 >= p0 beyond tolerance
// while strict checking is requested.
class MonotonicityError : public Error {
 public:
  explicit MonotonicityError(const std::string& what) : Error(what) {}
};

// A probability used as an inverse weight is too close to 0 or 1 even
// after clipping would be unfaithful, or a group weight sum vanishes.
class OverlapError : public Error {
 public:
  explicit OverlapError(const std::string& what) : Error(what) {}
};

// Requested feature that the given object cannot provide.
class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& what) : Error(what) {}
};

}  // namespace cpce
