#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace truelearn {

enum class ErrorKind {
  MalformedRow,
  CoverageOutOfRange,
  LabelNotBinary,
  EmptyDataset,
  OverlappingUsers,
  UnknownConcept,
  DegenerateGraph,
  ZeroVector,
  EmptyAnnotations,
  NonPositiveDuration,
  EmptyInput,
  NoPredictions,
  EmptyGrid,
  DegenerateVariance,
  EmptyState,
  EmptyHistory,
  InvalidArgument,
  ConfigError,
  IoError,
  NetworkError,
  ChecksumMismatch,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library. Parsing errors
/// carry the 1-based row number of the offending line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::int64_t> row = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::int64_t> row() const noexcept { return row_; }

 private:
  ErrorKind kind_;
  std::optional<std::int64_t> row_;
};

}  // namespace truelearn
