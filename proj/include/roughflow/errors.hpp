#pragma once

#include <stdexcept>
#include <string>

namespace roughflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Short machine-readable tag used in structured error reports.
  [[nodiscard]] virtual const char* kind() const noexcept { return "error"; }
  /// Numerical failures map to a distinct CLI exit code.
  [[nodiscard]] virtual bool numerical() const noexcept { return false; }
};

#define ROUGHFLOW_ERROR(Name, Tag, IsNumerical)                             \
  class Name : public Error {                                               \
   public:                                                                  \
    using Error::Error;                                                     \
    [[nodiscard]] const char* kind() const noexcept override { return Tag; } \
    [[nodiscard]] bool numerical() const noexcept override {                \
      return IsNumerical;                                                   \
    }                                                                       \
  };

// Field evaluated at the origin, where b is undefined.
ROUGHFLOW_ERROR(SingularityError, "singularity", true)
// Argument outside the domain of an operation.
ROUGHFLOW_ERROR(DomainError, "domain", false)
ROUGHFLOW_ERROR(NotInvertibleError, "not_invertible", false)
// Finite-difference stencil straddles a branch of a piecewise formula.
ROUGHFLOW_ERROR(StencilError, "stencil", true)
ROUGHFLOW_ERROR(StiffnessError, "stiffness", true)
ROUGHFLOW_ERROR(InconsistentFlowError, "inconsistent_flow", true)
ROUGHFLOW_ERROR(InsufficientResolutionError, "insufficient_resolution", true)
ROUGHFLOW_ERROR(ExperimentError, "experiment", true)
ROUGHFLOW_ERROR(ConfigError, "config", false)

#undef ROUGHFLOW_ERROR

}  // namespace roughflow
