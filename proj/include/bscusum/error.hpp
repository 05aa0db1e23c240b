#pragma once

#include <stdexcept>
#include <string>

namespace bscusum {

/// Failure categories; the CLI maps these onto process exit codes.
enum class ErrorKind {
  Usage = 1,
  Data = 2,
  Numerical = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Bad arguments or preconditions violated by the caller.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

/// Input data that cannot support the requested computation.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

/// An iterative or Monte Carlo procedure that failed to converge or produced non-finite output.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// Raised when an observation source runs dry before a signal or the run-length cap.
class StreamEnded : public DataError {
 public:
  explicit StreamEnded(const std::string& what) : DataError(what) {}
};

}  // namespace bscusum
