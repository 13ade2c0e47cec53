#pragma once

#include <stdexcept>
#include <string>

namespace sfs {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input matrices do not have compatible dimensions.
struct ShapeError : Error {
    using Error::Error;
};

// Invalid configuration value (rank too large, nonpositive tolerance, ...).
struct ConfigError : Error {
    using Error::Error;
};

// D(M|R) is +inf: some M_kg > 0 where R_kg = 0.
struct InfiniteDivergence : Error {
    using Error::Error;
};

// A component is degenerate: zero column in P, or a pair of identically
// zero exposure rows.
struct DegenerateComponent : Error {
    using Error::Error;
};

// A numerical contract was broken (entry below the negativity clamp,
// singular mixing matrix, divergence increase, ...).
struct ContractViolation : Error {
    using Error::Error;
};

// Malformed input file; the message names the offending cell.
struct ParseError : Error {
    using Error::Error;
};

// Filesystem failure (open/rename/write).
struct IoError : Error {
    using Error::Error;
};

}  // namespace sfs
