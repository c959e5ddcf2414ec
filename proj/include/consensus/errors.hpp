#pragma once

#include <stdexcept>
#include <string>

namespace consensus {

/// Base class of all errors thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input text (topology files, simulation configs). The message
/// names the 1-based line the problem was found on.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Operation requires a connected topology.
class ConnectivityError : public Error {
public:
    using Error::Error;
};

/// Invalid argument value (gains, ranges, eigenvalue domain, missing n).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Eigenstructure did not match what a connected topology guarantees.
class SpectralError : public Error {
public:
    using Error::Error;
};

/// Internal cross-check failed (e.g. a claimed crossing frequency does not
/// satisfy the unit-magnitude condition).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Mismatched dimensions between topologies, states or transforms.
class DimensionError : public Error {
public:
    using Error::Error;
};

}  // namespace consensus
