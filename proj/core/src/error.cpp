#include "hsdm/error.hpp"

namespace hsdm {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::NotDominating: return "NotDominating";
    case ErrorCode::InvalidMu: return "InvalidMu";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::InvalidTau: return "InvalidTau";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::SliceMismatch: return "SliceMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::InvalidSparsity: return "InvalidSparsity";
    case ErrorCode::InvalidDelta: return "InvalidDelta";
    case ErrorCode::ZeroTruth: return "ZeroTruth";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace hsdm
