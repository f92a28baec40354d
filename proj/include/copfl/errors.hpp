#pragma once

#include <stdexcept>
#include <string>

namespace copfl {

// Vector/mask length disagreement.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Non-finite value produced or received where finite math is required.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Leave-one-out algebra undefined: one client holds (almost) all the weight.
class DegenerateLeaveOneOutError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Synthetic-data generation could not satisfy its separation constraint.
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Pool too small for the requested partition.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Config parse or validation failure; message names the field and range.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace copfl
