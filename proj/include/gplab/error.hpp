#pragma once

#include <stdexcept>
#include <string>

namespace gplab {

/// Bad input: malformed config, violated precondition, mismatched grids.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical gate tripped (norm drift, truncation loss, non-convergence).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ValidationError(what);
}

}  // namespace gplab
