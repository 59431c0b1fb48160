#pragma once

#include <stdexcept>
#include <string>

namespace ostd {

// Base class for every error thrown by the library. The CLI maps the
// concrete subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated a documented precondition (empty pattern, m < 2, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input data failed validation (schema violations, EOS inside a document,
// single-class labels, vocabulary mismatch, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Surface form missing from a frozen vocabulary.
class UnknownTokenError : public DataError {
 public:
  explicit UnknownTokenError(std::string surface)
      : DataError("unknown token: '" + surface + "'"),
        surface_(std::move(surface)) {}
  const std::string& surface() const { return surface_; }

 private:
  std::string surface_;
};

enum class CorruptKind {
  kBadMagic,
  kVersionMismatch,
  kTruncated,
  kChecksumMismatch,
  kMalformed,
};

const char* to_string(CorruptKind kind);

// Index or token file whose bytes do not describe a valid object.
class CorruptFileError : public DataError {
 public:
  CorruptFileError(CorruptKind kind, const std::string& subject,
                   const std::string& what)
      : DataError("corrupt " + subject + " (" + to_string(kind) + "): " + what),
        kind_(kind) {}
  CorruptKind kind() const { return kind_; }

 private:
  CorruptKind kind_;
};

}  // namespace ostd
