#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spikelens {

enum class ErrorCode {
  // configuration
  InvalidConfig,
  InvalidHyperparams,
  // data
  MissingColumn,
  NonUniformGrid,
  DuplicateTimestamp,
  EmptyFile,
  BadTimestamp,
  BadNumber,
  MissingPriceValue,
  MissingValue,
  UnfillableLeadingGap,
  UnknownChannel,
  SegmentTooShort,
  SingleClassDataset,
  DimensionMismatch,
  TooFewRows,
  TooFewAxes,
  TooManyFeatures,
  CorruptModelFile,
  VersionMismatch,
  MalformedTree,
  // environment
  IoFailure,
  StageNotReady,  // a stage ran before the stage producing its inputs
  Internal,
};

enum class ErrorClass { Config, Data, Pipeline };

std::string_view to_string(ErrorCode code);
ErrorClass classify(ErrorCode code);

// Single exception type; the code tells callers what failed and the CLI maps
// the class onto its exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  ErrorClass error_class() const noexcept { return classify(code_); }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace spikelens
