#include "truelearn/error.hpp"

namespace truelearn {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::CoverageOutOfRange: return "CoverageOutOfRange";
    case ErrorKind::LabelNotBinary: return "LabelNotBinary";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::OverlappingUsers: return "OverlappingUsers";
    case ErrorKind::UnknownConcept: return "UnknownConcept";
    case ErrorKind::DegenerateGraph: return "DegenerateGraph";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::EmptyAnnotations: return "EmptyAnnotations";
    case ErrorKind::NonPositiveDuration: return "NonPositiveDuration";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NoPredictions: return "NoPredictions";
    case ErrorKind::EmptyGrid: return "EmptyGrid";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::EmptyState: return "EmptyState";
    case ErrorKind::EmptyHistory: return "EmptyHistory";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::NetworkError: return "NetworkError";
    case ErrorKind::ChecksumMismatch: return "ChecksumMismatch";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorKind kind, const std::string& message,
                     std::optional<std::int64_t> row) {
  std::string out = to_string(kind);
  if (row) out += " at row " + std::to_string(*row);
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message,
             std::optional<std::int64_t> row)
    : std::runtime_error(decorate(kind, message, row)), kind_(kind), row_(row) {}

}  // namespace truelearn
