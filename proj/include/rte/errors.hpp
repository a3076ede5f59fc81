#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rte {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. Rows are 1-based data rows (header excluded),
/// columns are 1-based field positions.
class ParseError : public Error {
public:
    ParseError(std::size_t row, std::size_t column, const std::string& reason)
        : Error("row " + std::to_string(row) + ", column " + std::to_string(column) + ": " + reason),
          row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

/// Input that parses but violates a domain contract.
class ValidationError : public Error {
public:
    using Error::Error;
};

class NonFiniteTime : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NonPositiveTau : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class JitterTooLarge : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class EmptyDataset : public ValidationError {
public:
    EmptyDataset() : ValidationError("empty dataset") {}
};

class NotFullyObserved : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InvalidParameter : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Numerically degenerate situations: the input is valid but the requested
/// quantity cannot be computed from it.
class NumericalError : public Error {
public:
    using Error::Error;
};

class DegenerateVariance : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ThetaOutOfDomain : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InsufficientReplicates : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class BracketError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace rte
