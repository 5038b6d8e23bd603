#pragma once

#include <stdexcept>
#include <string>

namespace dcm {

// Error categories map onto CLI exit codes: config=2, input=3, empty-result=4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyResultError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition (negative metric, n > bin capacity, ...).
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

struct EmptyTreatment : InputError {
  EmptyTreatment() : InputError("treatment vector has no attributes") {}
};

struct ParseError : InputError {
  ParseError(const std::string& path, std::size_t line, const std::string& detail)
      : InputError(path + ":" + std::to_string(line) + ": " + detail),
        line_number(line) {}
  std::size_t line_number;
};

struct DuplicateMessage : InputError {
  explicit DuplicateMessage(const std::string& message_id)
      : InputError("duplicate message_id: " + message_id) {}
};

struct FutureEvent : InputError {
  FutureEvent() : InputError("event timestamp is after the evaluation time") {}
};

struct UnknownMessage : InputError {
  explicit UnknownMessage(const std::string& message_id)
      : InputError("message not present in the log: " + message_id) {}
};

struct UnknownStratum : InputError {
  explicit UnknownStratum(const std::string& label)
      : InputError("no ground-truth entry for stratum: " + label) {}
};

struct EmptyLedger : EmptyResultError {
  EmptyLedger() : EmptyResultError("ledger contains no matched messages") {}
};

}  // namespace dcm
