#pragma once

#include <stdexcept>
#include <string>

namespace enzyrx {

// Base class for every error raised by the library. Callers that only care
// about "something in enzyrx failed" can catch this one type.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidGeometry : public Error {
public:
  using Error::Error;
};

// A reference to a species, voxel or population that does not exist.
class InvalidReference : public Error {
public:
  using Error::Error;
};

class ConservationViolation : public Error {
public:
  using Error::Error;
};

class SingularOperator : public Error {
public:
  using Error::Error;
};

class IntegrationFailure : public Error {
public:
  IntegrationFailure(const std::string& what, double last_good_time)
      : Error(what), last_good_time_(last_good_time) {}
  double last_good_time() const noexcept { return last_good_time_; }

private:
  double last_good_time_;
};

class InconsistentObservation : public Error {
public:
  using Error::Error;
};

// Precondition of the log-ratio recursion: J_s(t-) must stay positive.
class PositivityViolation : public Error {
public:
  using Error::Error;
};

// Design targets that no parameter choice can meet (e.g. P_T <= 0).
class InfeasibleDesign : public Error {
public:
  using Error::Error;
};

// A design exists but violates an operating-regime premise (alpha <= 1, ...).
class RegimeError : public Error {
public:
  using Error::Error;
};

// A well-formed request the library does not model, such as two receivers
// sharing a voxel.
class UnsupportedConfiguration : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace enzyrx
