#pragma once

#include <stdexcept>
#include <string>

namespace trieig {

/// Bad input: violated precondition or malformed model/config.
class validation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure: degenerate spectrum, non-finite values, lost
/// convergence.
class numerics_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The dominant eigenvalue is not simple (gap below tolerance), or the
/// spectrum does not have the shape an operation requires.
class degenerate_spectrum_error : public numerics_error {
public:
    using numerics_error::numerics_error;
};

/// Geometric construction failed (curve did not converge, polylines did
/// not intersect, ...).
class geometry_error : public numerics_error {
public:
    using numerics_error::numerics_error;
};

/// Time step too large for the grid (explicit scheme stability bound).
class cfl_error : public numerics_error {
public:
    using numerics_error::numerics_error;
};

} // namespace trieig
