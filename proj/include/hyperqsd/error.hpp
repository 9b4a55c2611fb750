#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hyperqsd {

enum class ErrorCode {
  DimMismatch,
  NonHermitianInput,
  NotHermitian,
  BadTrace,
  NotPositive,
  ZeroNorm,
  NonFinite,
  NotTimelike,
  PastPointing,
  SuperluminalBeta,
  StepTooLarge,
  MissingBoostGenerator,
  NonCommutingGenerators,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

// One violated invariant and how badly it was violated.
struct Violation {
  ErrorCode code;
  double magnitude;
};

// Base for every error raised by the library. Carries at least one violation;
// validate_density can report several at once.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, double magnitude = 0.0);
  Error(std::vector<Violation> violations, std::string message);

  ErrorCode code() const noexcept { return violations_.front().code; }
  double magnitude() const noexcept { return violations_.front().magnitude; }
  const std::vector<Violation>& violations() const noexcept { return violations_; }
  bool has(ErrorCode c) const noexcept;

 private:
  std::vector<Violation> violations_;
};

}  // namespace hyperqsd
