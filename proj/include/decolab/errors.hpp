#pragma once

#include <stdexcept>
#include <string>

namespace decolab {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad input value: non-finite, out of range, or inconsistent with the model.
class InvalidParameter : public Error {
public:
  using Error::Error;
};

/// Configuration rejected at ingestion. Carries the offending field and, for
/// parse errors, the 1-based line number (0 when not applicable).
class ConfigError : public InvalidParameter {
public:
  ConfigError(std::string field, std::size_t line, const std::string& what)
      : InvalidParameter(what), field_(std::move(field)), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

private:
  std::string field_;
  std::size_t line_;
};

/// Computation produced a non-finite value, diverged, or hit a singular case
/// such as an infinite decoherence time.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// The two-mode intensity protocol cannot be applied to this configuration.
class ProtocolInapplicable : public Error {
public:
  using Error::Error;
};

}  // namespace decolab
