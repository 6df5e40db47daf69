#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace riskstrat {

// Base of every error thrown by the library. Callers that only care about
// "something about the input was wrong" can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Counts or probabilities that cannot form a 2x2 table (all zero, negative,
// not summing to one).
class DegenerateTableError : public Error {
 public:
  using Error::Error;
};

// A conditional quantity was requested whose conditioning margin is empty,
// e.g. sensitivity with no cases or PPV with no positives.
class UndefinedMarginError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of the operation (risk threshold
// outside (0,1), log of a nonpositive Youden ratio, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Value sits exactly on a boundary where a transform is undefined: |MRS| = 0.5
// for the logit interval, risks of exactly 0 or 1 for odds rescaling.
class BoundaryError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Inference requested on a table that carries no sample size.
class MissingSampleSizeError : public Error {
 public:
  using Error::Error;
};

// Malformed input data. `row()` is the 1-based data row (header excluded),
// or 0 when the problem is not tied to a row.
class DataError : public Error {
 public:
  DataError(const std::string& message, std::size_t row = 0)
      : Error(row == 0 ? message
                       : "row " + std::to_string(row) + ": " + message),
        row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace riskstrat
