#ifndef OSA_ERRORS_HPP
#define OSA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace osa {

enum class ErrorCode {
  // usage / configuration
  UnknownConfigKey,
  BadArguments,
  // data
  MalformedHeader,
  TruncatedData,
  DegenerateCalibration,
  RangeOverflow,
  MalformedXml,
  MissingField,
  NegativeAhi,
  InvalidConfig,
  InvalidFrequency,
  EmptyInput,
  TooFewPeaks,
  EmptySeries,
  TooShort,
  DimensionMismatch,
  ShapeMismatch,
  TinyBatch,
  InsufficientSamples,
  TooFewSamples,
  EmptyClass,
  LengthMismatch,
  EmptyTrainingSet,
  EmptyFeatureSpace,
  SingleClassData,
  IncompleteTable,
  MissingFile,
  // numeric
  DegenerateWindow,
  DegenerateSeries,
  ZeroTotalPower,
  DegenerateVariance,
  NonFiniteFeature,
  NonFiniteLoss,
};

// Exit-code category used by the CLI: 1 usage, 2 data, 3 numeric.
inline int error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownConfigKey:
    case ErrorCode::BadArguments:
      return 1;
    case ErrorCode::DegenerateWindow:
    case ErrorCode::DegenerateSeries:
    case ErrorCode::ZeroTotalPower:
    case ErrorCode::DegenerateVariance:
    case ErrorCode::NonFiniteFeature:
    case ErrorCode::NonFiniteLoss:
      return 3;
    default:
      return 2;
  }
}

inline const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownConfigKey: return "UnknownConfigKey";
    case ErrorCode::BadArguments: return "BadArguments";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::DegenerateCalibration: return "DegenerateCalibration";
    case ErrorCode::RangeOverflow: return "RangeOverflow";
    case ErrorCode::MalformedXml: return "MalformedXml";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::NegativeAhi: return "NegativeAhi";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidFrequency: return "InvalidFrequency";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::TooFewPeaks: return "TooFewPeaks";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TinyBatch: return "TinyBatch";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::EmptyFeatureSpace: return "EmptyFeatureSpace";
    case ErrorCode::SingleClassData: return "SingleClassData";
    case ErrorCode::IncompleteTable: return "IncompleteTable";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::DegenerateWindow: return "DegenerateWindow";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
    case ErrorCode::ZeroTotalPower: return "ZeroTotalPower";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  int exit_category() const noexcept { return error_category(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace osa

#endif  // OSA_ERRORS_HPP
