#pragma once

#include <stdexcept>

namespace tailhedge {

// Malformed or inconsistent input data: CSV contents, date windows, shape mismatches.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative numerical procedure failed (non-convergence, invalid fit region).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tailhedge
