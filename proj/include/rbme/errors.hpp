#pragma once

#include <stdexcept>
#include <string>

namespace rbme {

// Bad inputs: wrong sizes, out-of-range parameters. The CLI maps these to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SizingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParameterError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Total weight of a point set is not positive.
class DegenerateMassError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A randomized construction failed its acceptance event too many times.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rbme
