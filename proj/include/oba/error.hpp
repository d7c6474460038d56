#ifndef OBA_ERROR_HPP
#define OBA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace oba {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that do not compose (channel counts, inner dims, ...).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Bad argument values that are not shape problems (ratio >= 1, eta > y_max, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf encountered during training or gradient evaluation.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed config files. Carries the offending line when known.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0) : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Failures reading the binary formats and model bundles.
class FormatError : public Error {
 public:
  enum class Kind { BadMagic, Truncated, ShapeInconsistency, VersionMismatch, MissingComponent, Io };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace oba

#endif  // OBA_ERROR_HPP
