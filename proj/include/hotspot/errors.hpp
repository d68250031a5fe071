#pragma once

#include <stdexcept>
#include <string>

namespace hotspot {

// Unreadable input, missing columns, malformed files.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or violated preconditions on parameters.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Singular transforms, empty training windows, non-finite samples.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hotspot
