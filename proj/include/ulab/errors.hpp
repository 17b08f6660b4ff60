#pragma once

#include <stdexcept>
#include <string>

namespace ulab {

// Bad user input: malformed files, invalid parameters, shape mismatches.
// The CLI maps this to exit code 2.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A documented resource cap would be exceeded (enumeration count, brute-force
// dimension, dyadic exponent, ...). The CLI maps this to exit code 3.
struct GuardError : std::runtime_error {
    explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ulab
