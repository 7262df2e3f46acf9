#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace citetail {

enum class ErrorCode {
  DuplicateId,
  NegativeCitations,
  EmptyCountry,
  EmptyId,
  MultiCountry,
  EmptyCorpus,
  UnknownCountry,
  PercentileOutOfRange,
  LocalRankAbsent,
  ZeroTotal,
  OutOfRange,
  DivisionByZero,
  TooFewValues,
  NOutOfRange,
  InvalidWindow,
  InsufficientPoints,
  DegenerateAbscissa,
  NonFiniteInput,
  InsufficientTail,
  InvalidDistributionParams,
  InvalidConfig,
  ParseError,
  ValidationError,
  IoError,
  StaleCache,
  CorruptCache,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::NegativeCitations: return "NegativeCitations";
    case ErrorCode::EmptyCountry: return "EmptyCountry";
    case ErrorCode::EmptyId: return "EmptyId";
    case ErrorCode::MultiCountry: return "MultiCountry";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::UnknownCountry: return "UnknownCountry";
    case ErrorCode::PercentileOutOfRange: return "PercentileOutOfRange";
    case ErrorCode::LocalRankAbsent: return "LocalRankAbsent";
    case ErrorCode::ZeroTotal: return "ZeroTotal";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::TooFewValues: return "TooFewValues";
    case ErrorCode::NOutOfRange: return "NOutOfRange";
    case ErrorCode::InvalidWindow: return "InvalidWindow";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::DegenerateAbscissa: return "DegenerateAbscissa";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::InsufficientTail: return "InsufficientTail";
    case ErrorCode::InvalidDistributionParams: return "InvalidDistributionParams";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::CorruptCache: return "CorruptCache";
  }
  return "Unknown";
}

/// Every failure raised by the library carries an ErrorCode so callers
/// (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace citetail
