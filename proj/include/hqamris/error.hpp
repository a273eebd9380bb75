#pragma once

#include <stdexcept>

namespace hqamris {

/// A numerical routine failed to meet its accuracy target.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration (unknown key, bad value, bad preset).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hqamris
