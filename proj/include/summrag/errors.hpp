#pragma once

#include <cstddef>
#include <exception>
#include <stdexcept>
#include <string>

namespace summrag {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller handed us input that violates a documented precondition
// (bad config, empty corpus, duplicate ids, missing table rows, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class IngestError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class RetrievalError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class DispatchError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class TransformError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class TemplatingError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class MetricError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

// A model call failed (transport, HTTP status, exhausted retries, missing
// mock script entry). Carries the request fingerprint so the failing call
// can be located in logs and mock scripts.
class BackendError : public Error {
 public:
  explicit BackendError(const std::string& message, std::string fingerprint = "")
      : Error(message), fingerprint_(std::move(fingerprint)) {}

  const std::string& fingerprint() const { return fingerprint_; }

 private:
  std::string fingerprint_;
};

// Dialogue generation gave up: the backend kept returning output that failed
// validation after the configured retry budget.
class GenerationError : public BackendError {
 public:
  using BackendError::BackendError;
};

// Structurally invalid token text. offset() is the byte position in the
// original input that the parser gave up on.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " (byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_ = 0;
};

// A judge reply that did not contain exactly one of the two expected verdict
// words. The raw reply is preserved for debugging.
class JudgeParseError : public ParseError {
 public:
  explicit JudgeParseError(const std::string& message, std::string raw_reply)
      : ParseError(message, 0), raw_reply_(std::move(raw_reply)) {}

  const std::string& raw_reply() const { return raw_reply_; }

 private:
  std::string raw_reply_;
};

// No scenario signature (or more than one) matched a dialogue.
class ClassificationError : public Error {
 public:
  using Error::Error;
};

// Process exit code mapping shared by the CLI and the test drivers:
// 0 success, 2 precondition violation, 3 backend failure, 4 parse failure,
// 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace summrag
