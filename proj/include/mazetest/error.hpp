#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mazetest {

/// Precondition violations: out-of-bounds cells, invalid paths, empty groups.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Rejection sampling ran out of attempts.
class ExhaustionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsolvableMazeError : public DomainError {
 public:
  UnsolvableMazeError() : DomainError("maze has no path from entrance to exit") {}
};

/// A maze description that does not follow the template. Carries the
/// 1-based number of the first offending line.
class MalformedDescription : public std::runtime_error {
 public:
  MalformedDescription(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line), message_(message) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t line_;
  std::string message_;
};

}  // namespace mazetest
