#pragma once

#include <stdexcept>
#include <string>

namespace abphase {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Field evaluated on (or within the exclusion radius of) a source singularity.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Input violates a documented precondition or type invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Geometry is unsuitable for the requested construction (surface, linking, ...).
class GeometryError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace abphase
