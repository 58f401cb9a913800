// Exception hierarchy shared by every resest module.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace resest {

/// Coarse classification used by the command-line front end to pick an exit code.
enum class ErrorKind {
  Input,      ///< malformed input, bad arguments, violated preconditions
  Audit,      ///< an assumption audit failed
  Numerical,  ///< the simulation diverged or a numerical routine broke down
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Matrix or vector shapes do not fit together, or a size is out of range.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorKind::Input, what) {}
};

/// A scalar argument is outside the domain of a formula (nonpositive gain, etc.).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Input, what) {}
};

class SingularBasis : public Error {
 public:
  explicit SingularBasis(const std::string& what) : Error(ErrorKind::Input, what) {}
};

/// The unobservable subspace of `agent` (0-based) is not spanned by a subset of the candidate basis.
class BasisMismatch : public Error {
 public:
  BasisMismatch(std::size_t agent, const std::string& what)
      : Error(ErrorKind::Audit, what), agent_(agent) {}
  std::size_t agent() const noexcept { return agent_; }

 private:
  std::size_t agent_;
};

/// The shared-basis heuristic gave up. This does not prove that no basis exists.
class NoSharedBasisFound : public Error {
 public:
  explicit NoSharedBasisFound(const std::string& what) : Error(ErrorKind::Audit, what) {}
};

class CombinatorialLimit : public Error {
 public:
  explicit CombinatorialLimit(const std::string& what) : Error(ErrorKind::Input, what) {}
};

class StructureViolation : public Error {
 public:
  explicit StructureViolation(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class UnobservablePair : public Error {
 public:
  explicit UnobservablePair(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class NoIndicatedValues : public Error {
 public:
  explicit NoIndicatedValues(const std::string& what = "no indicated values (all s_i = 0)")
      : Error(ErrorKind::Input, what) {}
};

class InvalidLyapunovCertificate : public Error {
 public:
  explicit InvalidLyapunovCertificate(const std::string& what) : Error(ErrorKind::Input, what) {}
};

class AuditFailure : public Error {
 public:
  explicit AuditFailure(const std::string& what) : Error(ErrorKind::Audit, what) {}
};

/// Some state norm exceeded the blow-up threshold. `last_stable_time` is the last
/// grid time at which every norm was still below it.
class NumericalBlowup : public Error {
 public:
  NumericalBlowup(double last_stable_time, const std::string& what)
      : Error(ErrorKind::Numerical, what), last_stable_time_(last_stable_time) {}
  double last_stable_time() const noexcept { return last_stable_time_; }

 private:
  double last_stable_time_;
};

/// Scenario file could not be parsed or failed schema validation.
class ScenarioError : public Error {
 public:
  explicit ScenarioError(const std::string& what) : Error(ErrorKind::Input, what) {}
};

}  // namespace resest
