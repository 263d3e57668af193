#pragma once

#include <stdexcept>
#include <string>

namespace c2l {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor shape disagreement; message names both shapes.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Invalid argument value (negative temperature, p >= 1, ...).
class ParamError : public Error {
public:
    using Error::Error;
};

// Malformed or out-of-contract input data; message carries the location.
class DataError : public Error {
public:
    using Error::Error;
};

// Bad run/model configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Filesystem / stream failures, surfaced with the path.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace c2l
