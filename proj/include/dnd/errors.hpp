#pragma once

#include <stdexcept>
#include <string>

namespace dnd {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid argument, shape/split mismatch or violated precondition.
class ValueError : public Error {
public:
    using Error::Error;
};

/// Fatal failure in the communication layer.
class TransportError : public Error {
public:
    using Error::Error;
};

/// A blocking transport operation exceeded the deadlock-detection timeout.
class TimeoutError : public TransportError {
public:
    using TransportError::TransportError;
};

/// Ranks diverged in their sequence of collective calls (program-order
/// mismatch), or a message payload did not match the receiver's expectation.
class OrderingError : public TransportError {
public:
    using TransportError::TransportError;
};

/// Malformed dataset file or unparsable text input.
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace dnd
