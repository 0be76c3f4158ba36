#pragma once

#include <stdexcept>
#include <string>

namespace fermicool {

// Precondition of an operation violated by the caller.
struct ContractError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// More atoms than trap states.
struct CapacityError : std::length_error {
  using std::length_error::length_error;
};

struct FitError : std::runtime_error {
  FitError(const std::string& what, double residual)
      : std::runtime_error(what), residual(residual) {}
  double residual;
};

// Inconsistent rate catalog or occupancy detected inside the event loop.
struct EngineFault : std::runtime_error {
  EngineFault(const std::string& what, std::string dump)
      : std::runtime_error(what), diagnostic(std::move(dump)) {}
  std::string diagnostic;
};

}  // namespace fermicool
