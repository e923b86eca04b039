#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace kcsprng {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wrong length for a fixed-size bit string (key, IV, 256-bit block).
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Precondition violated by the caller (modulus mismatch, lag out of range, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Modular inverse of zero.
class NonInvertibleError : public Error {
 public:
  using Error::Error;
};

/// Curve table could not be parsed, verified, locked or used.
class TableError : public Error {
 public:
  using Error::Error;
};

/// A record failed one of the verify_curve checks while loading.
class VerificationError : public TableError {
 public:
  VerificationError(std::size_t index, std::string check)
      : TableError("curve record " + std::to_string(index) + " failed check '" + check + "'"),
        index_(index),
        check_(std::move(check)) {}

  std::size_t index() const noexcept { return index_; }
  const std::string& check() const noexcept { return check_; }

 private:
  std::size_t index_;
  std::string check_;
};

/// The entropy source cannot deliver another seed.
class EntropyError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Input too short for a statistical test.
class ShortStreamError : public Error {
 public:
  using Error::Error;
};

}  // namespace kcsprng
