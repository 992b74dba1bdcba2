#pragma once

#include <stdexcept>
#include <string>

namespace rwre {

// Caller passed arguments that violate an operation's contract.
// Mapped to process exit code 2 by the CLI.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

// A configured memory or work budget would be exceeded. Exit code 3.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// Operation requires a model class the given spec does not belong to
// (e.g. exact corrector machinery on a non-finite environment chain).
class UnsupportedModelError : public std::runtime_error {
 public:
  explicit UnsupportedModelError(const std::string& what) : std::runtime_error(what) {}
};

// Config or data file rejected; carries the offending line when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace rwre
