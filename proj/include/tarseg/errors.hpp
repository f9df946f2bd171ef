#pragma once

#include <stdexcept>
#include <string>

namespace tarseg {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid tensor shapes or mismatched dimensions.
struct ShapeError : Error {
    using Error::Error;
};

// Invalid configuration or violated precondition.
struct ConfigError : Error {
    using Error::Error;
};

// File and serialization failures.
struct IoError : Error {
    using Error::Error;
};

// Degenerate numeric input, e.g. a zero-norm vector fed to cosine similarity.
struct DegenerateInputError : Error {
    using Error::Error;
};

// A measured property failed: benchmark ordering, gradient check, eval assertion.
struct CheckError : Error {
    using Error::Error;
};

}  // namespace tarseg
