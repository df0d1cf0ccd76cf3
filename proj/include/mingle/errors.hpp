#pragma once

#include <stdexcept>
#include <string>

namespace mingle {

/// Thrown when a caller breaks an operation's precondition (CLI exit code 2).
class ContractViolation : public std::invalid_argument {
public:
  explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a computation cannot produce a finite result (CLI exit code 3).
class NumericalFailure : public std::runtime_error {
public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Multilateration normal equations are too ill-conditioned to solve.
class DegenerateGeometry : public NumericalFailure {
public:
  explicit DegenerateGeometry(const std::string& what) : NumericalFailure(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace mingle
