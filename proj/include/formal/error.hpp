#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace formal {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad caller input: empty text, invalid control, out-of-range ids.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents. Carries the file and 1-based line when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// Tensor shape mismatch; the message names the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A training run cannot continue, e.g. exploration produced no data.
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Unreadable, corrupted or incompatible checkpoint.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace formal
