#pragma once

#include <stdexcept>
#include <string>

namespace huf {

// Error taxonomy. The CLI maps each category to a distinct exit code.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor shape / dimension mismatches.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// NaN/Inf escaping a numeric kernel, diverging training, etc.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// API misuse (backward without forward, stage-order violations, ...).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace huf
