#pragma once

#include <stdexcept>
#include <string>

namespace vtour {

// Base of every exception the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input outside the mathematical domain of an operation (non-finite angle, zero vector, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Caller-supplied parameters that violate an operation's preconditions.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Filesystem or stream failure; carries the offending path in the message.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace vtour
