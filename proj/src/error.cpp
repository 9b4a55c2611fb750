#include "hyperqsd/error.hpp"

#include <algorithm>

namespace hyperqsd {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NonHermitianInput: return "NonHermitianInput";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::BadTrace: return "BadTrace";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotTimelike: return "NotTimelike";
    case ErrorCode::PastPointing: return "PastPointing";
    case ErrorCode::SuperluminalBeta: return "SuperluminalBeta";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::MissingBoostGenerator: return "MissingBoostGenerator";
    case ErrorCode::NonCommutingGenerators: return "NonCommutingGenerators";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string message, double magnitude)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      violations_{{code, magnitude}} {}

Error::Error(std::vector<Violation> violations, std::string message)
    : std::runtime_error(message), violations_(std::move(violations)) {
  if (violations_.empty()) violations_.push_back({ErrorCode::InvalidArgument, 0.0});
}

bool Error::has(ErrorCode c) const noexcept {
  return std::any_of(violations_.begin(), violations_.end(),
                     [c](const Violation& v) { return v.code == c; });
}

}  // namespace hyperqsd
