#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pentapulse {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration value.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A run was refused because its preconditions (resonance, adiabatic regime,
/// step-size bound) do not hold. Maps to CLI exit code 2.
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// Integration step too coarse for the Hamiltonian norm.
class StepSizeError : public RegimeError {
 public:
  StepSizeError(const std::string& what, long required_steps)
      : RegimeError(what), required_steps_(required_steps) {}
  long required_steps() const noexcept { return required_steps_; }

 private:
  long required_steps_;
};

/// Numerical failure (NaN, residual growth, ambiguous branch tracking).
/// Maps to CLI exit code 3.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, long index = -1)
      : Error(what), index_(index) {}
  /// Slice or step index where the failure was detected, -1 if unknown.
  long index() const noexcept { return index_; }

 private:
  long index_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string out;
    for (const auto& s : p) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> problems_;
};

}  // namespace pentapulse
