#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mb {

enum class ErrorCode {
  DuplicateThing,
  UnknownThing,
  InvalidThing,
  InvalidRelation,
  NotAContext,
  MalformedDocument,
  UnknownReference,
  UnsortedEvents,
  UnknownTemplate,
  BadParam,
  InvalidParameter,
  InvalidDuration,
  InvalidInterval,
  ClockRegression,
  FrozenRecord,
  InvalidWeight,
  InvalidThreshold,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateThing: return "DuplicateThing";
    case ErrorCode::UnknownThing: return "UnknownThing";
    case ErrorCode::InvalidThing: return "InvalidThing";
    case ErrorCode::InvalidRelation: return "InvalidRelation";
    case ErrorCode::NotAContext: return "NotAContext";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::UnknownReference: return "UnknownReference";
    case ErrorCode::UnsortedEvents: return "UnsortedEvents";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::BadParam: return "BadParam";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidDuration: return "InvalidDuration";
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::ClockRegression: return "ClockRegression";
    case ErrorCode::FrozenRecord: return "FrozenRecord";
    case ErrorCode::InvalidWeight: return "InvalidWeight";
    case ErrorCode::InvalidThreshold: return "InvalidThreshold";
  }
  return "Unknown";
}

// All library failures are reported as mb::Error; code() identifies the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Carries the offending event index for scenario parse failures.
class ScenarioError : public Error {
 public:
  ScenarioError(ErrorCode code, std::size_t index, const std::string& message)
      : Error(code, "event " + std::to_string(index) + ": " + message),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace mb
