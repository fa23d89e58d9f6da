#pragma once
// Exception hierarchy. Every error carries the process exit code the CLI reports.

#include <stdexcept>
#include <string>

namespace acbc {

enum class ExitCode : int {
  ok = 0,
  certification = 1,  // numerical certification failed
  hypothesis = 2,     // configuration or hypothesis violated
  physics = 3,        // physics invariant violated (e.g. energy growth)
  io = 4
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, ExitCode code = ExitCode::certification)
      : std::runtime_error(what), code_(code) {}
  ExitCode exit_code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Bad mesh or scenario parameters, schema violations.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what, ExitCode::hypothesis) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(what, ExitCode::hypothesis) {}
};

/// Coefficient fields that make the model ill-posed (m not bounded away from 0, ...).
class ModelError : public Error {
 public:
  explicit ModelError(const std::string& what) : Error(what, ExitCode::hypothesis) {}
};

/// A structural assumption on the operators fails. `tag` names it.
class AssumptionError : public Error {
 public:
  AssumptionError(std::string tag, const std::string& what)
      : Error(tag + ": " + what, ExitCode::hypothesis), tag_(std::move(tag)) {}
  const std::string& tag() const noexcept { return tag_; }

 private:
  std::string tag_;
};

class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& what) : Error(what, ExitCode::hypothesis) {}
};

/// Spectral parameter not admissible. `kind` distinguishes the reason.
class SpectralParameterError : public Error {
 public:
  enum class Kind { in_spectrum_A0, pencil_singular, zero_parameter };
  SpectralParameterError(Kind kind, const std::string& what)
      : Error(what, ExitCode::certification), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what, ExitCode::certification) {}
};

class PhysicsError : public Error {
 public:
  explicit PhysicsError(const std::string& what) : Error(what, ExitCode::physics) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what, ExitCode::io) {}
};

}  // namespace acbc
