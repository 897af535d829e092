#pragma once

#include <stdexcept>
#include <string>

namespace psim {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied an invalid argument or configuration (CLI exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Input data cannot support the requested computation (CLI exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public DataError {
 public:
  using DataError::DataError;
};

/// Malformed vector file, corpus record, config file or table.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

/// A token, source label or table level was looked up and not found.
class NotFoundError : public DataError {
 public:
  using DataError::DataError;
};

/// Weight distribution with fewer than two support points.
class DegenerateConditioningError : public DataError {
 public:
  using DataError::DataError;
};

/// A side of a similarity query has zero variance under the metric.
class UndefinedSimilarityError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace psim
