#pragma once

#include <stdexcept>
#include <string>

namespace polyflow {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// -- geometry ---------------------------------------------------------------

struct NonConvergence : Error {
    using Error::Error;
};
struct BadWitness : Error {
    using Error::Error;
};
struct InteriorPoint : Error {
    using Error::Error;
};

// -- series -----------------------------------------------------------------

struct DimensionMismatch : Error {
    using Error::Error;
};
struct NonzeroConstantTerm : Error {
    using Error::Error;
};
struct NotCentered : Error {
    using Error::Error;
};
struct NotInRegime : Error {
    using Error::Error;
};
struct NegativeTime : Error {
    using Error::Error;
};

// -- formal solver ----------------------------------------------------------

struct InvalidSpectrum : Error {
    using Error::Error;
};
struct NotDiagonalLinearPart : Error {
    using Error::Error;
};
struct PreconditionU : Error {
    using Error::Error;
};
struct ZeroPerturbation : Error {
    using Error::Error;
};

// -- flow tracer ------------------------------------------------------------

struct LeftCover : Error {
    using Error::Error;
};
struct NoAdmissibleCell : Error {
    using Error::Error;
};
struct EquilibriumNotInCell : Error {
    using Error::Error;
};

// -- yamabe -----------------------------------------------------------------

struct DegenerateTriangle : Error {
    using Error::Error;
};
struct FlipLoop : Error {
    using Error::Error;
};

// -- io / config ------------------------------------------------------------

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace polyflow
