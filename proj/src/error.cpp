#include "cyclecast/error.hpp"

namespace cyclecast {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MissingFile: return "MissingFile";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::NonContiguousMonths: return "NonContiguousMonths";
    case Errc::InvalidPhaseCode: return "InvalidPhaseCode";
    case Errc::InvalidSplit: return "InvalidSplit";
    case Errc::BoundaryOutsideDataset: return "BoundaryOutsideDataset";
    case Errc::TooShort: return "TooShort";
    case Errc::NonPositiveForLog: return "NonPositiveForLog";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::EmptyOverlap: return "EmptyOverlap";
    case Errc::DegenerateCovariance: return "DegenerateCovariance";
    case Errc::ZeroReferenceLoading: return "ZeroReferenceLoading";
    case Errc::PanelTooShort: return "PanelTooShort";
    case Errc::EmptyAfterFilter: return "EmptyAfterFilter";
    case Errc::InsufficientHistory: return "InsufficientHistory";
    case Errc::DegenerateInput: return "DegenerateInput";
    case Errc::SingleClass: return "SingleClass";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::BadK: return "BadK";
    case Errc::IoError: return "IoError";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::CorruptFile: return "CorruptFile";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::Empty: return "Empty";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::BadSpec: return "BadSpec";
    case Errc::NetworkError: return "NetworkError";
    case Errc::AuthError: return "AuthError";
    case Errc::UnknownSeries: return "UnknownSeries";
    case Errc::NonNumericPayload: return "NonNumericPayload";
    case Errc::CacheMiss: return "CacheMiss";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace cyclecast
