#pragma once

#include <stdexcept>
#include <string>

namespace poseidon {

// Error categories map onto the CLI exit-code contract:
// config -> 2, data -> 3, checkpoint -> 4, numeric -> 5.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual int exit_code() const { return 1; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 2; }
};

class DataError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 3; }
};

// Shape mismatches name the offending axis in the message.
class ShapeError : public DataError {
public:
    using DataError::DataError;
};

class GeometryError : public DataError {
public:
    using DataError::DataError;
};

class CheckpointError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 4; }
};

class NumericError : public Error {
public:
    using Error::Error;
    int exit_code() const override { return 5; }
};

} // namespace poseidon
