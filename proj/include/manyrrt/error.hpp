#pragma once

#include <stdexcept>
#include <string>

namespace manyrrt {

enum class ErrorCode {
  kInfeasibleWorld,
  kNoReachableGoal,
  kFormat,
};

/// Raised for domain failures that callers are expected to handle, as
/// opposed to std::invalid_argument for contract violations.
class PlanningError : public std::runtime_error {
 public:
  PlanningError(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace manyrrt
