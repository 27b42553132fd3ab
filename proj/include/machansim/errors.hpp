#pragma once

#include <stdexcept>
#include <string>

namespace machansim {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// File I/O failures (open, read, write). CLI exit code 1.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Malformed files, bad configuration, dimension mismatches. CLI exit code 2.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Numeric failures: indefinite matrices, degenerate inputs, out-of-range
// parameters. CLI exit code 3.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace machansim
