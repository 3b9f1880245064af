#pragma once

#include <stdexcept>
#include <string>

namespace fel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One of the simple-nested-fractal conditions (1, 3, 4 or 5) failed.
class ConditionViolation : public Error {
 public:
  ConditionViolation(int condition, const std::string& what)
      : Error("condition " + std::to_string(condition) + " violated: " + what),
        condition_(condition) {}

  int condition() const noexcept { return condition_; }

 private:
  int condition_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class LevelMismatch : public Error {
 public:
  using Error::Error;
};

/// Requested enumeration exceeds the configured point cap.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

/// Interior block of a Laplacian is not positive definite.
class SingularInterior : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class DegenerateStructure : public Error {
 public:
  using Error::Error;
};

/// Counting measure at level n cannot resolve the level-m cutoff (n <= m).
class ResolutionTooCoarse : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

/// Malformed input file, function spec or command-line configuration.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Broken internal invariant (indicates a bug, not bad input).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace fel
