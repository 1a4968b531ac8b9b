#pragma once

#include <stdexcept>
#include <string>

namespace fastkan {

// Error taxonomy. Everything derives from std::runtime_error; the CLI maps
// each type onto its stable exit code (usage 2, data 3, numeric 4).

// Incompatible matrix/layer dimensions.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rank-deficient system in a least-squares / Cholesky solve.
struct SingularError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation called in the wrong order (e.g. backward before forward).
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or argument values.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Missing or inconsistent data (files, labels out of range, ...).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed file contents (IDX, model files).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numeric failure during training (NaN/Inf loss).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem write/read failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fastkan
