#pragma once

#include <stdexcept>
#include <string>

namespace addsel {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller violated a documented precondition or config invariant.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class TooFewDistinctValues : public Error {
public:
    using Error::Error;
};

class ZeroColumn : public Error {
public:
    using Error::Error;
};

class UndefinedAtZero : public Error {
public:
    using Error::Error;
};

// Failures of the numerical core. The CLI maps these to exit code 2.
class NumericalError : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NonFiniteObjective : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SaturatedModel : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class AllSaturated : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Malformed input files (CSV cells, fit documents).
class ParseError : public Error {
public:
    using Error::Error;
};

class MissingFit : public Error {
public:
    using Error::Error;
};

}  // namespace addsel
