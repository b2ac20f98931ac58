#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace symtyler {

enum class ErrorKind {
  InvalidArgument,
  DimMismatch,
  NotUnitary,
  ClosureOverflow,
  UnsupportedSize,
  DegenerateSpectrum,
  InconsistentMultiplicity,
  NotPositiveDefinite,
  NotUnitNorm,
  NotInvariant,
  InsufficientSamples,
  ZeroVector,
  NumericalBreakdown,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::NotUnitary: return "NotUnitary";
    case ErrorKind::ClosureOverflow: return "ClosureOverflow";
    case ErrorKind::UnsupportedSize: return "UnsupportedSize";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::InconsistentMultiplicity: return "InconsistentMultiplicity";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NotUnitNorm: return "NotUnitNorm";
    case ErrorKind::NotInvariant: return "NotInvariant";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind; the
/// message is prefixed with the kind name so one-line diagnostics name it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace symtyler
