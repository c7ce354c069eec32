#pragma once

#include <stdexcept>
#include <string>

namespace collrabi {

// Base of every error the library throws. exit_code() is the CLI contract:
// 2 input/config, 3 analysis/insufficient data, 4 internal numerical.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept = 0;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

// Malformed input file; the message carries the offending line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }
  int exit_code() const noexcept override { return 2; }

 private:
  std::size_t line_;
};

// Model misuse while synthesizing data (e.g. a negative Poisson rate).
class GenerationError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

class AnalysisError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class InitializationError : public AnalysisError {
 public:
  using AnalysisError::AnalysisError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

}  // namespace collrabi
