#pragma once

#include <stdexcept>
#include <string>

namespace rowspray {

// Base class for all library errors. Subclasses map onto CLI exit codes:
// config -> 2, input/io/decode/parse -> 3, validation/numeric -> 4.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad arguments, dimension mismatches, violated preconditions.
class InvalidInputError : public Error {
public:
    using Error::Error;
};

// Missing or inconsistent world file / georeferencing.
class GeoreferenceError : public Error {
public:
    using Error::Error;
};

// Malformed image data.
class DecodeError : public Error {
public:
    using Error::Error;
};

// Malformed text documents (CSV, JSON, key-value reports).
class ParseError : public Error {
public:
    using Error::Error;
};

// Filesystem failures.
class IoError : public Error {
public:
    using Error::Error;
};

// Bad run configuration (config file or flags).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Statistical operations that need more observations than given.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

}  // namespace rowspray
