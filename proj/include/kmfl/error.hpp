#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kmfl {

enum class ErrorKind {
  kDimensionMismatch,
  kNonFinite,
  kInvalidParameter,
  kNonPositiveParameter,
  kEmptyDataset,
  kStepTooLarge,
  kIndefiniteCoefficients,
  kSizeMismatch,
  kTooLarge,
  kBadMagic,
  kTruncatedPayload,
  kTrailingBytes,
  kIo,
  kConfig,
  kDegenerateFit,
};

inline std::string_view to_string(ErrorKind kind);

/// Library-wide exception. `kind()` identifies the failure class; simulation
/// blow-ups additionally carry the index of the offending step.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::uint64_t> step = std::nullopt)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        step_(step) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::uint64_t> step() const noexcept { return step_; }

 private:
  ErrorKind kind_;
  std::optional<std::uint64_t> step_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kNonFinite: return "NonFinite";
    case ErrorKind::kInvalidParameter: return "InvalidParameter";
    case ErrorKind::kNonPositiveParameter: return "NonPositiveParameter";
    case ErrorKind::kEmptyDataset: return "EmptyDataset";
    case ErrorKind::kStepTooLarge: return "StepTooLarge";
    case ErrorKind::kIndefiniteCoefficients: return "IndefiniteCoefficients";
    case ErrorKind::kSizeMismatch: return "SizeMismatch";
    case ErrorKind::kTooLarge: return "TooLarge";
    case ErrorKind::kBadMagic: return "BadMagic";
    case ErrorKind::kTruncatedPayload: return "TruncatedPayload";
    case ErrorKind::kTrailingBytes: return "TrailingBytes";
    case ErrorKind::kIo: return "Io";
    case ErrorKind::kConfig: return "Config";
    case ErrorKind::kDegenerateFit: return "DegenerateFit";
  }
  return "Unknown";
}

}  // namespace kmfl
