#pragma once

#include <stdexcept>
#include <string>

namespace tvflow {

/// Invalid user-supplied configuration: grid sizes, solver parameters,
/// config files, initial-data files.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The dual iteration produced non-finite values.  With a step size below
/// the stability bound this cannot happen; the message cites the bound.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A caller broke an API precondition, e.g. passed an inconsistent
/// primal/dual pair to duality_gap or mismatched vector lengths.
struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

/// An internal numerical consistency check failed, e.g. a vector that must
/// be real after an inverse transform carried a large imaginary residue.
struct InternalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tvflow
