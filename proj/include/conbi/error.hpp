#pragma once

#include <stdexcept>
#include <string>

namespace conbi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (bad file, mixed spaces, invalid weights).
class InputError : public Error {
 public:
  using Error::Error;
};

/// An iterative procedure ran out of its iteration budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// A checked hypothesis of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace conbi
