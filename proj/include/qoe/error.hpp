#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qoe {

/// Root of every error raised by the library. The CLI maps subclasses onto
/// process exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Malformed or invalid input data.
class DataError : public Error {
  public:
    using Error::Error;
};

/// Header or column-set mismatch, or rows that do not conform to a schema.
class SchemaError : public DataError {
  public:
    using DataError::DataError;
};

class ParseError : public DataError {
  public:
    ParseError(std::size_t row, const std::string& what)
        : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}

    [[nodiscard]] std::size_t row() const noexcept { return row_; }

  private:
    std::size_t row_;
};

class ValidationError : public DataError {
  public:
    using DataError::DataError;
};

/// Metric undefined for the given input (e.g. zero variance for R²).
class MetricError : public DataError {
  public:
    using DataError::DataError;
};

class DivergenceError : public Error {
  public:
    DivergenceError(std::size_t epoch, double learning_rate)
        : Error("training diverged at epoch " + std::to_string(epoch) +
                " (learning rate " + std::to_string(learning_rate) + ")"),
          epoch_(epoch),
          learning_rate_(learning_rate) {}

    [[nodiscard]] std::size_t epoch() const noexcept { return epoch_; }
    [[nodiscard]] double learning_rate() const noexcept { return learning_rate_; }

  private:
    std::size_t epoch_;
    double learning_rate_;
};

/// A model document cannot be used at the receiving node.
class TransferError : public Error {
  public:
    using Error::Error;
};

class UnsupportedModelError : public Error {
  public:
    using Error::Error;
};

}  // namespace qoe
