#pragma once

#include <stdexcept>
#include <string>

namespace sparsetime {

// Run configuration is invalid or inconsistent. CLI exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input data could not be read or does not support the requested run. CLI exit code 2.
class DataError : public std::runtime_error {
public:
    enum class Kind { MissingFile, MissingColumn, NoRows, Malformed, Insufficient };

    DataError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

// Non-finite values or a solver that failed to converge. CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sparsetime
