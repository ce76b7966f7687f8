#pragma once

#include <stdexcept>
#include <string>

namespace gridlock {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside its documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested vehicle density cannot fit on the road (spacing <= d + s0).
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Integration produced an inconsistent state; usually means dt is too large.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input file.
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace gridlock
