#pragma once

#include <stdexcept>
#include <string>

namespace skinfx {

/// Invalid input: bad layout, violated precondition, malformed file.
/// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical kernel failed (singular system, solver non-convergence,
/// rank-deficient basis). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace skinfx
