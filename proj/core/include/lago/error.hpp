#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lago {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller violated an operation precondition.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Malformed input document. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class UnsupportedFormatError : public Error {
public:
    using Error::Error;
};

/// Bad or incomplete run configuration (registry gaps, missing files).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An internal consistency check failed; signals corrupted inputs.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// The sandbox harness broke the wire protocol.
class ProtocolError : public Error {
public:
    using Error::Error;
};

class GatewayError : public Error {
public:
    using Error::Error;
};

class ReplayMissError : public GatewayError {
public:
    explicit ReplayMissError(const std::string& tag)
        : GatewayError("replay miss: no recorded response for request tag '" + tag + "'"), tag_(tag) {}

    const std::string& tag() const noexcept { return tag_; }

private:
    std::string tag_;
};

/// Completion-token ceiling reached; the runner stops and writes a partial report.
class BudgetExhaustedError : public GatewayError {
public:
    using GatewayError::GatewayError;
};

/// The run cannot start (e.g. no parseable initial individual).
class FatalStartupError : public Error {
public:
    using Error::Error;
};

}  // namespace lago
