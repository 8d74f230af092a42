#include "pcdf/error.hpp"

namespace pcdf {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NotUnitDiagonal: return "NotUnitDiagonal";
    case ErrorKind::OffDiagonalOutOfRange: return "OffDiagonalOutOfRange";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::CutoffTooLarge: return "CutoffTooLarge";
    case ErrorKind::LoadingOutOfRange: return "LoadingOutOfRange";
    case ErrorKind::RhoFNotPositiveDefinite: return "RhoFNotPositiveDefinite";
    case ErrorKind::ZeroDiagonalWeight: return "ZeroDiagonalWeight";
    case ErrorKind::RootNotBracketed: return "RootNotBracketed";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::CholeskyFailure: return "CholeskyFailure";
    case ErrorKind::ClassCountMismatch: return "ClassCountMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace pcdf
