#pragma once

#include <stdexcept>
#include <string>

namespace mhdbl {

// Bad user input: counts, ranges, unknown keys. Maps to CLI exit code 1.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Initial/boundary data that violate a compatibility condition.
class CompatibilityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Shape or lattice mismatch between objects that must share a grid.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Numerical breakdown (singular pivot, non-finite state). Maps to exit code 2.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mhdbl
