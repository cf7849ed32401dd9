#pragma once

#include <stdexcept>
#include <string>

namespace abdd {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data (files, dimension mismatches, shapes).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Diagram or circuit that violates structural invariants.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A configured size cap was exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Node whose sample is single-class; it must be routed to a leaf first.
class PureNode : public Error {
 public:
  using Error::Error;
};

/// No hypothesis has positive edge (or the split makes no progress).
class WeakLearnerFailure : public Error {
 public:
  using Error::Error;
};

/// Constant function where a non-trivial one is required.
class TrivialFunction : public Error {
 public:
  using Error::Error;
};

/// A SAT query hit its time budget; robustness is undetermined.
class Indeterminate : public Error {
 public:
  Indeterminate(const std::string& what, int radius)
      : Error(what), radius_(radius) {}
  int radius() const noexcept { return radius_; }

 private:
  int radius_;
};

}  // namespace abdd
