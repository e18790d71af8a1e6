#pragma once

#include <stdexcept>
#include <string>

namespace relaysim {

// Caller broke a documented precondition (bad shape, empty input, ...).
class ContractViolation : public std::invalid_argument {
 public:
  explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

// A numeric routine could not produce a trustworthy result.
class NumericFailure : public std::runtime_error {
 public:
  explicit NumericFailure(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const char* message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace relaysim
