#pragma once

#include <stdexcept>
#include <string>

namespace nlnl {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector/matrix dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Problem parameters outside their domain (c < 2, k = 0, empty dataset, ...).
class InvalidProblem : public Error {
 public:
  using Error::Error;
};

// Experiment or component configuration is invalid. `field` names the
// offending key ("noise.ratio") when known.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  explicit ConfigError(const std::string& message) : Error(message) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Malformed input file (IDX, CSV, checkpoint).
class ParseError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf reached a parameter update.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A selective phase admitted no samples for a whole epoch.
class StarvationError : public Error {
 public:
  using Error::Error;
};

// Expected artifact missing from a run directory.
class MissingArtifact : public Error {
 public:
  using Error::Error;
};

}  // namespace nlnl
