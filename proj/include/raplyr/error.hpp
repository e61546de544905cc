#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace raplyr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SeverityOutOfRange : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class EmptySong : public EmptyInput {
 public:
  using EmptyInput::EmptyInput;
};

class EmptyCorpus : public EmptyInput {
 public:
  using EmptyInput::EmptyInput;
};

class EmptyQuery : public EmptyInput {
 public:
  using EmptyInput::EmptyInput;
};

class EmptyTestSet : public EmptyInput {
 public:
  using EmptyInput::EmptyInput;
};

class TooShort : public Error {
 public:
  using Error::Error;
};

class NegativeInput : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Child process failed to start or exited nonzero.
class ProcessError : public Error {
 public:
  using Error::Error;
};

class PhonemizerProcessError : public ProcessError {
 public:
  using ProcessError::ProcessError;
};

class Timeout : public ProcessError {
 public:
  using ProcessError::ProcessError;
};

// Lyrics API failures.
class AuthError : public Error {
 public:
  using Error::Error;
};

class RateLimited : public Error {
 public:
  using Error::Error;
};

class NetworkError : public Error {
 public:
  using Error::Error;
};

}  // namespace raplyr
