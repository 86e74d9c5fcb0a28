#pragma once

#include <stdexcept>
#include <string>

namespace cprfit {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A joint frame carries non-finite coordinates or is otherwise malformed.
class InvalidFrameError : public Error {
public:
  using Error::Error;
};

/// Degenerate plane (zero normal).
class GeometryError : public Error {
public:
  using Error::Error;
};

/// Empty or otherwise unusable sample window.
class WindowError : public Error {
public:
  using Error::Error;
};

/// Window holds fewer samples than the minimum fit count.
class WindowTooSmallError : public WindowError {
public:
  using WindowError::WindowError;
};

/// Frame timestamps do not strictly increase.
class StreamOrderError : public Error {
public:
  using Error::Error;
};

/// A configuration value violates its invariant. `field()` names the offender.
class ConfigError : public Error {
public:
  ConfigError(std::string field, const std::string &what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Cost function returned a non-finite value.
class OptimizerError : public Error {
public:
  using Error::Error;
};

/// Correlation ratio is undefined (no output variance or a single level).
class SensitivityError : public Error {
public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
public:
  using Error::Error;
};

/// File content does not follow its format.
class ParseError : public Error {
public:
  using Error::Error;
};

} // namespace cprfit
