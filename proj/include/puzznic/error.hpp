#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace puzznic {

enum class ErrorKind {
  // level-io
  RaggedRows,
  BadChar,
  NoPerimeter,
  NotQuiescent,
  TooLarge,
  TooSmall,
  TooManyPatterns,
  BadMoveLine,
  // core-engine
  PositionNotPatterned,
  IllegalMove,
  // planner
  InvalidBound,
  WrongOutcome,
  // sat-encoder
  HorizonTooLarge,
  LevelInvalid,
  ModelInconsistent,
  BackendFailure,
  BoundExhausted,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::RaggedRows: return "RaggedRows";
    case ErrorKind::BadChar: return "BadChar";
    case ErrorKind::NoPerimeter: return "NoPerimeter";
    case ErrorKind::NotQuiescent: return "NotQuiescent";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::TooSmall: return "TooSmall";
    case ErrorKind::TooManyPatterns: return "TooManyPatterns";
    case ErrorKind::BadMoveLine: return "BadMoveLine";
    case ErrorKind::PositionNotPatterned: return "PositionNotPatterned";
    case ErrorKind::IllegalMove: return "IllegalMove";
    case ErrorKind::InvalidBound: return "InvalidBound";
    case ErrorKind::WrongOutcome: return "WrongOutcome";
    case ErrorKind::HorizonTooLarge: return "HorizonTooLarge";
    case ErrorKind::LevelInvalid: return "LevelInvalid";
    case ErrorKind::ModelInconsistent: return "ModelInconsistent";
    case ErrorKind::BackendFailure: return "BackendFailure";
    case ErrorKind::BoundExhausted: return "BoundExhausted";
  }
  return "Unknown";
}

/// Every failure raised by the library. `kind()` is the machine-readable tag,
/// `what()` carries a one-line diagnostic (with a position where one exists).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace puzznic
