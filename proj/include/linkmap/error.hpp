#pragma once

#include <stdexcept>
#include <string>

namespace linkmap {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a data contract (unknown names,
/// conflicting calls, too few genotypes, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Parameter combinations that can never be executed, e.g. error detection
/// on a finite-generation RIL population.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace linkmap
