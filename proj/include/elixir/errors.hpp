#pragma once

#include <stdexcept>
#include <string>

namespace elixir {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or violated precondition (bad stride, missing weight, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed content in a file or on the wire.
class ParseError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failure (missing file, unreadable/unwritable path).
class IoError : public Error {
public:
    using Error::Error;
};

// Statistically undefined result (e.g. correlation of a zero-variance column).
class UndefinedStatError : public Error {
public:
    using Error::Error;
};

} // namespace elixir
