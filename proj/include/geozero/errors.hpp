#pragma once

#include <stdexcept>
#include <string>

namespace geozero {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failures map to CLI exit code 3, configuration failures to 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NonUnitary : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// delta' vanished, so the 2pi-pulse duration is undefined.
class DegenerateSplitting : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StepTooCoarse : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DurationTooShort : public Error {
 public:
  using Error::Error;
};

class ModeUnsupported : public Error {
 public:
  using Error::Error;
};

class NotADDSequence : public Error {
 public:
  using Error::Error;
};

class SignalTooStrong : public Error {
 public:
  using Error::Error;
};

class FitDiverged : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoDipFound : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonuniformSpacing : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line = 0, std::string field = {})
      : Error(format(message, line, field)), line_(line), field_(std::move(field)) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(const std::string& message, int line, const std::string& field) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "'" + field + "': ";
    return out + message;
  }

  int line_;
  std::string field_;
};

}  // namespace geozero
