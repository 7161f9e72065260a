#pragma once

#include <stdexcept>
#include <string>

namespace sdc {

// Base for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A model or set violates a structural invariant (row sums, irreducibility, ...).
struct StructuralError : Error {
    using Error::Error;
};

// An argument is outside the operation's domain (bad symbol, n too small, ...).
struct DomainError : Error {
    using Error::Error;
};

// Inputs are individually valid but mutually inconsistent for the requested
// operation (wrong weight kind, wrong dimension, non-simplex vector, ...).
struct SpecError : Error {
    using Error::Error;
};

// A requested computation exceeds the hard size guard.
struct SizeError : Error {
    using Error::Error;
};

// Config file cannot be parsed or fails validation.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace sdc
