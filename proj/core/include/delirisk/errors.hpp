#pragma once

#include <stdexcept>
#include <string>

namespace delirisk {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad input: missing/malformed files, unknown columns, invalid config.
/// The CLI maps these to exit code 2.
class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(msg) {}
};

/// Computation cannot proceed: undefined metric, degenerate table,
/// diverging training run. The CLI maps these to exit code 1.
class ComputeError : public Error {
public:
    explicit ComputeError(const std::string& msg) : Error(msg) {}
};

}  // namespace delirisk
