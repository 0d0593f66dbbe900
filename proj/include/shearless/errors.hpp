#pragma once

#include <stdexcept>
#include <string>

namespace shearless {

/// Base for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

/// A trajectory or query left the admissible domain.
class DomainEscape : public Error {
 public:
  explicit DomainEscape(const std::string& what, double time = 0.0)
      : Error(what), time_(time) {}
  /// Time (or step index) at which the escape was detected.
  double time() const { return time_; }

 private:
  double time_;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class NumericalBlowup : public Error {
 public:
  using Error::Error;
};

class SignalOutOfRange : public Error {
 public:
  using Error::Error;
};

/// Eigenvectors are undefined at the query point (C is nearly a multiple of I).
class IsotropicPoint : public Error {
 public:
  using Error::Error;
};

class Stagnation : public Error {
 public:
  using Error::Error;
};

/// The whole field is isotropic, so singularity detection is meaningless.
class DegenerateField : public Error {
 public:
  using Error::Error;
};

/// Every node of a strain field is invalid.
class FieldFailure : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage failed; carries the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace shearless
