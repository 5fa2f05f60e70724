#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ipdsaw {

/// Parameter outside the mathematical domain of an operation (e.g. beta <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed configuration, path or record.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Enumeration or dynamic-programming request above the configured cap.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Query outside the range covered by a simulated path.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A rejection sampler ran out of attempts.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, std::uint64_t attempts)
      : std::runtime_error(what + " (attempts: " + std::to_string(attempts) + ")"),
        attempts_(attempts) {}

  std::uint64_t attempts() const noexcept { return attempts_; }

 private:
  std::uint64_t attempts_;
};

}  // namespace ipdsaw
