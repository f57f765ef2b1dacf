#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qplab {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-contract arguments (non-finite entries, bad shapes, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// A matrix that must have full (row) rank does not.
class SingularInputError : public Error {
 public:
  SingularInputError(const std::string& what, double singular_value, std::size_t index)
      : Error(what), singular_value_(singular_value), index_(index) {}

  double singular_value() const noexcept { return singular_value_; }
  std::size_t index() const noexcept { return index_; }

 private:
  double singular_value_;
  std::size_t index_;
};

// The cocycle has rank zero, i.e. some iterate vanishes identically.
class NilpotentError : public Error {
 public:
  using Error::Error;
};

// A numerical procedure could not find admissible data (bad-set hits, collisions).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace qplab
