#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cyclecast {

enum class Errc {
  MissingFile,
  MalformedRow,
  NonContiguousMonths,
  InvalidPhaseCode,
  InvalidSplit,
  BoundaryOutsideDataset,
  TooShort,
  NonPositiveForLog,
  ZeroVariance,
  EmptyOverlap,
  DegenerateCovariance,
  ZeroReferenceLoading,
  PanelTooShort,
  EmptyAfterFilter,
  InsufficientHistory,
  DegenerateInput,
  SingleClass,
  DimensionMismatch,
  BadK,
  IoError,
  VersionMismatch,
  CorruptFile,
  LengthMismatch,
  Empty,
  EmptyMatrix,
  BadSpec,
  NetworkError,
  AuthError,
  UnknownSeries,
  NonNumericPayload,
  CacheMiss,
  ConfigError,
};

std::string_view errc_name(Errc code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers (and the CLI's exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace cyclecast
