#pragma once

#include <stdexcept>
#include <string>

namespace syntens {

/// File or record level problem: unreadable stream, bad magic, malformed line.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Not enough usable records to produce a meaningful result.
class InsufficientDataError : public DataError {
public:
    explicit InsufficientDataError(const std::string& msg) : DataError(msg) {}
};

/// Numeric failure: NaN loss, overflow outside the representable range.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A quantity whose defining counts are zero (PMI of an unseen pair, correlation
/// of a constant vector). Callers typically filter these out.
class UndefinedValueError : public std::domain_error {
public:
    explicit UndefinedValueError(const std::string& msg) : std::domain_error(msg) {}
};

} // namespace syntens
