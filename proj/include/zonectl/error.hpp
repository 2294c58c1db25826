#pragma once

#include <stdexcept>
#include <string>

namespace zonectl {

/// Invalid configuration or user input. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values, solver failures and similar. The CLI maps it to exit code 3.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace zonectl
