#pragma once

#include <stdexcept>
#include <string>

namespace wysiwim {

// Root of every error the toolkit throws. Callers that only need a message
// catch this; the CLI maps the subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad flags, descriptors, profiles or other user-supplied settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read or written. The message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

// Input text or records that cannot be ingested (invalid UTF-8, malformed
// manifest lines, unknown ids). Messages carry a 1-based line number when
// the input is line oriented.
class IngestionError : public Error {
 public:
  using Error::Error;
};

// A binary or JSON file does not follow its declared format.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Declared shapes or dimensions disagree.
class ShapeMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace wysiwim
