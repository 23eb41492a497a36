#pragma once

#include <stdexcept>
#include <string>

namespace pipeforge {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text: JSON, pseudocode, or a file that cannot be read.
class ParseError : public Error {
public:
  using Error::Error;
};

/// Well-formed input that breaks a structural rule. The message names the
/// offending item (spec id, field, JSON path, statement index).
class ValidationError : public Error {
public:
  using Error::Error;
};

} // namespace pipeforge
