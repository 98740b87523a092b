#ifndef PCQA_ERROR_HPP
#define PCQA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace pcqa {

enum class ErrorCode {
  // PLY / manifest parsing
  MalformedHeader,
  UnsupportedFormat,
  TruncatedBody,
  MissingColumn,
  UnparsableScore,
  EmptyManifest,
  EmptyRange,
  // pipeline
  InvalidCloud,
  TooFewPoints,
  NonFiniteFeature,
  ShapeMismatch,
  EmptyCluster,
  TooFewReferences,
  LengthMismatch,
  ConstantTarget,
  ConstantInput,
  TooFewSamples,
  ConfigMismatch,
  ConfigError,
  UnrecordedForward,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::TruncatedBody: return "TruncatedBody";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnparsableScore: return "UnparsableScore";
    case ErrorCode::EmptyManifest: return "EmptyManifest";
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::InvalidCloud: return "InvalidCloud";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::TooFewReferences: return "TooFewReferences";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ConstantTarget: return "ConstantTarget";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::UnrecordedForward: return "UnrecordedForward";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace pcqa

#endif  // PCQA_ERROR_HPP
