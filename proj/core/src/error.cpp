#include "spikelens/error.hpp"

namespace spikelens {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidHyperparams: return "InvalidHyperparams";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonUniformGrid: return "NonUniformGrid";
    case ErrorCode::DuplicateTimestamp: return "DuplicateTimestamp";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::BadTimestamp: return "BadTimestamp";
    case ErrorCode::BadNumber: return "BadNumber";
    case ErrorCode::MissingPriceValue: return "MissingPriceValue";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::UnfillableLeadingGap: return "UnfillableLeadingGap";
    case ErrorCode::UnknownChannel: return "UnknownChannel";
    case ErrorCode::SegmentTooShort: return "SegmentTooShort";
    case ErrorCode::SingleClassDataset: return "SingleClassDataset";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::TooFewAxes: return "TooFewAxes";
    case ErrorCode::TooManyFeatures: return "TooManyFeatures";
    case ErrorCode::CorruptModelFile: return "CorruptModelFile";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::MalformedTree: return "MalformedTree";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::StageNotReady: return "StageNotReady";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

ErrorClass classify(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidHyperparams:
      return ErrorClass::Config;
    case ErrorCode::IoFailure:
    case ErrorCode::StageNotReady:
    case ErrorCode::Internal:
      return ErrorClass::Pipeline;
    default:
      return ErrorClass::Data;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace spikelens
