#pragma once

#include <stdexcept>
#include <string>

namespace hgr {

// Base class for all library errors. Input validation failures derive from
// InputError, numerical failures from NumericalError; the CLI maps these to
// distinct exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(msg) {}
};

class ZeroVarianceError : public InputError {
public:
    explicit ZeroVarianceError(const std::string& msg = "input vector has zero variance")
        : InputError(msg) {}
};

class InvalidDegreeError : public InputError {
public:
    explicit InvalidDegreeError(const std::string& msg = "kernel degree must be >= 1")
        : InputError(msg) {}
};

class LengthMismatchError : public InputError {
public:
    explicit LengthMismatchError(const std::string& msg = "sample vectors differ in length")
        : InputError(msg) {}
};

class DimensionMismatchError : public InputError {
public:
    explicit DimensionMismatchError(const std::string& msg = "coefficient length does not match kernel degree")
        : InputError(msg) {}
};

class InvalidSpecError : public InputError {
public:
    explicit InvalidSpecError(const std::string& msg) : InputError(msg) {}
};

class NoOracleError : public InputError {
public:
    explicit NoOracleError(const std::string& msg) : InputError(msg) {}
};

class MissingColumnError : public InputError {
public:
    explicit MissingColumnError(const std::string& msg) : InputError(msg) {}
};

class NonNumericValueError : public InputError {
public:
    explicit NonNumericValueError(const std::string& msg) : InputError(msg) {}
};

class EmptyDatasetError : public InputError {
public:
    explicit EmptyDatasetError(const std::string& msg = "dataset contains no rows") : InputError(msg) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

}  // namespace hgr
