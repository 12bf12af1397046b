#pragma once

#include <stdexcept>
#include <string>

namespace anchorprobe {

/// Base for every error the toolkit raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the operation's domain (bad anchor value, k < 2, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but carries no information for the statistic
/// (zero variance, all-zero differences, constant matrix).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents (bad magic, truncated payload, unparsable row).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Contract violation in otherwise parsable input (duplicate key, out-of-range score).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class PlacementInfeasible : public DomainError {
 public:
  using DomainError::DomainError;
};

class IllConditioned : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage needs an upstream artifact that is neither scheduled
/// earlier nor present on disk.
class MissingDependency : public Error {
 public:
  using Error::Error;
};

/// Process exit codes shared by the CLI and the pipeline runner.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitMissingDependency = 3;
inline constexpr int kExitInternal = 4;

}  // namespace anchorprobe
