#pragma once

#include <stdexcept>
#include <string>

namespace srrm {

// Error hierarchy maps onto CLI exit codes:
//   ConfigError -> 2, DataError -> 3, NumericalError -> 4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : DataError {
    using DataError::DataError;
};

struct ParseError : DataError {
    using DataError::DataError;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A cluster lost all soft mass: K or mu_c infeasible for this instance.
struct DegenerateClusterError : NumericalError {
    using NumericalError::NumericalError;
};

struct IllConditionedError : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace srrm
