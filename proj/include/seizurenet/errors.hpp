#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seizurenet {

// Root of every error the library throws. Commands map the subclass
// families below onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class VerificationError : public Error {
 public:
  using Error::Error;
};

// Fewer leading-seizure folds than leave-one-out needs.
class InsufficientSeizures : public Error {
 public:
  using Error::Error;
};

#define SEIZURENET_DATA_ERROR(Name)          \
  class Name : public DataError {            \
   public:                                   \
    using DataError::DataError;              \
  }

// ingest
SEIZURENET_DATA_ERROR(MalformedHeader);
SEIZURENET_DATA_ERROR(UnsupportedVariant);
SEIZURENET_DATA_ERROR(TruncatedData);
SEIZURENET_DATA_ERROR(UnknownChannel);
SEIZURENET_DATA_ERROR(InvalidSpec);
// segment
SEIZURENET_DATA_ERROR(WindowTooShort);
// net
SEIZURENET_DATA_ERROR(ShapeMismatch);
SEIZURENET_DATA_ERROR(PoolLargerThanInput);
SEIZURENET_DATA_ERROR(NonFiniteInput);
SEIZURENET_DATA_ERROR(StaleCache);
// train
SEIZURENET_DATA_ERROR(MissingClass);
SEIZURENET_DATA_ERROR(NonFiniteGradient);
SEIZURENET_DATA_ERROR(NoTestSamples);
SEIZURENET_DATA_ERROR(UndefinedMetric);
// report
SEIZURENET_DATA_ERROR(MissingRun);

#undef SEIZURENET_DATA_ERROR

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}

  std::size_t line() const noexcept { return line_; }
  // The message without the line prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

}  // namespace seizurenet
