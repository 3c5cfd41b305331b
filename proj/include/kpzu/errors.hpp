#pragma once

#include <stdexcept>
#include <string>

namespace kpzu {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain where the quantity is defined
/// (MGF outside its finite interval, mu < 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class UnsupportedMomentError : public Error {
 public:
  using Error::Error;
};

/// Memory or enumeration budget exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A lattice query or light cone falls outside the stored window.
class BoundsError : public Error {
 public:
  using Error::Error;
};

class InadmissibleRuleError : public Error {
 public:
  using Error::Error;
};

class DerivativeExtractionError : public Error {
 public:
  using Error::Error;
};

/// The surface left the neighbourhood where its growth rule is trusted.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, long x, long t)
      : Error(what), x_(x), t_(t) {}
  long x() const noexcept { return x_; }
  long t() const noexcept { return t_; }

 private:
  long x_;
  long t_;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

/// An experiment compares quantities with different scaling limits.
class DesignError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ModeError : public Error {
 public:
  using Error::Error;
};

}  // namespace kpzu
