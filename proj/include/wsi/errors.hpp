#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wsi {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A commit request arrived for a start timestamp that already has a decision.
class DuplicateRequestError : public Error {
 public:
  using Error::Error;
};

// An abort was reported for a transaction the oracle already committed.
class ConflictError : public Error {
 public:
  using Error::Error;
};

// Operation invoked on a transaction handle that is no longer active.
class StateError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Log I/O failed; the decision that triggered the write is not exposed.
class WalError : public Error {
 public:
  using Error::Error;
};

class RecoveryError : public Error {
 public:
  using Error::Error;
};

class ReservationError : public Error {
 public:
  using Error::Error;
};

// Raised by Transaction::commit when the oracle could not make its decision
// durable. The handle stays active.
class CommitError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t token_index,
             std::size_t column)
      : Error(message), token_index_(token_index), column_(column) {}

  // Zero-based index of the offending token.
  std::size_t token_index() const { return token_index_; }
  // One-based character column of the offending token.
  std::size_t column() const { return column_; }

 private:
  std::size_t token_index_;
  std::size_t column_;
};

}  // namespace wsi
