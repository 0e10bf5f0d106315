#pragma once

#include <stdexcept>
#include <string>

namespace adcs {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rotation log requested too close to the angle-pi branch cut. Callers in
// training perturb and retry.
struct AngleNearPi : Error {
  AngleNearPi() : Error("rotation angle too close to pi for principal log") {}
};

struct WrongArity : Error {
  explicit WrongArity(const std::string& what) : Error(what) {}
};

struct NonScalarOutput : Error {
  NonScalarOutput() : Error("backward requires a scalar output node") {}
};

struct EmptyCloud : Error {
  EmptyCloud() : Error("point cloud is empty") {}
};

struct TooManyConstraints : Error {
  explicit TooManyConstraints(const std::string& what) : Error(what) {}
};

struct NaNLoss : Error {
  explicit NaNLoss(const std::string& what) : Error(what) {}
};

struct SingularNormalEquations : Error {
  SingularNormalEquations() : Error("normal equations singular beyond damping escalation") {}
};

struct InfeasibleStart : Error {
  explicit InfeasibleStart(const std::string& what) : Error(what) {}
};

struct SchemaMismatch : Error {
  explicit SchemaMismatch(const std::string& what) : Error(what) {}
};

struct UnsupportedTask : Error {
  explicit UnsupportedTask(const std::string& what) : Error(what) {}
};

}  // namespace adcs
