#pragma once

#include <stdexcept>

namespace beamg2 {

/// Invalid parameter values or malformed configuration. CLI exit code 2.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File system or file format failure. CLI exit code 3.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical failure: undefined quantity, integrator breakdown, degenerate
/// statistics. CLI exit code 4.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace beamg2
