#pragma once

#include <stdexcept>
#include <string>

namespace weakpath {

// Bad user input: malformed config, missing keys, violated preconditions.
// The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical check tripped (aliasing, truncated beam, non-finite state).
// The CLI maps this to exit code 3.
class NumericalDiagnostic : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace weakpath
