#pragma once

#include <stdexcept>
#include <string>

namespace kbp {

/// Base class for all errors raised by the toolkit.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Ontology schema could not be loaded or violates its own invariants.
class SchemaError : public Error {
public:
  explicit SchemaError(const std::string& what) : Error(what) {}
};

/// A precondition on caller-supplied data does not hold.
class InputError : public Error {
public:
  explicit InputError(const std::string& what) : Error(what) {}
};

/// HTTP-level failure talking to a chat backend.
class TransportError : public Error {
public:
  TransportError(const std::string& what, int status, bool retryable)
      : Error(what), status_(status), retryable_(retryable) {}
  int status() const { return status_; }
  bool retryable() const { return retryable_; }

private:
  int status_;
  bool retryable_;
};

/// Backend replied with 2xx but the body is not a usable completion.
class ProtocolError : public Error {
public:
  explicit ProtocolError(const std::string& what) : Error(what) {}
};

/// Bad configuration, including replay-backend misses.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// The judge reply contained no parseable score.
class JudgeParseError : public Error {
public:
  JudgeParseError(const std::string& what, std::string reply)
      : Error(what), reply_(std::move(reply)) {}
  const std::string& reply() const { return reply_; }

private:
  std::string reply_;
};

}  // namespace kbp
