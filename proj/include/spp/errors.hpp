#pragma once

#include <stdexcept>
#include <string>

namespace spp {

/// Solver produced non-finite values (typically a CFL violation).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Forward synthesis failed to reach the target by the terminal time.
class SynthesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario document could not be parsed or failed validation. `where()` is a
/// JSON pointer (schema errors) or "line L, column C" (syntax errors).
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

}  // namespace spp
