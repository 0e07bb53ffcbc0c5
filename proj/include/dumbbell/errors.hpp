#pragma once

#include <stdexcept>
#include <string>

namespace dumbbell {

// Operational failures: bad input, bad config, I/O. CLI maps these to exit 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidGeometry : Error {
    using Error::Error;
};

// Obstacle placement rejected by the clearance rules. Distinguished from
// geometric failure so sweeps can record it per placement instead of dying.
struct InfeasiblePlacement : Error {
    using Error::Error;
};

struct MeshError : Error {
    using Error::Error;
};

struct SolverError : Error {
    using Error::Error;
};

struct AnalysisError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

// Invariant violated at runtime (a check that should have held failed).
// CLI maps these to exit 2.
struct InvariantViolation : Error {
    using Error::Error;
};

} // namespace dumbbell
