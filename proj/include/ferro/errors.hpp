#pragma once

#include <stdexcept>
#include <string>

namespace ferro {

// Base class for everything this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- graph construction and input --------------------------------------

struct TooFewVertices : Error { using Error::Error; };
struct SelfLoop : Error { using Error::Error; };
struct DuplicateEdge : Error { using Error::Error; };
struct NonPositiveCoupling : Error { using Error::Error; };
struct DisconnectedGraph : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct InvalidParameter : Error { using Error::Error; };

// Malformed edge-list text; message carries the offending line number.
struct ParseError : Error { using Error::Error; };

// ---- basis and operators ------------------------------------------------

struct SectorTooLarge : Error { using Error::Error; };
struct SectorTooLargeForDense : Error { using Error::Error; };
struct SectorMismatch : Error { using Error::Error; };
struct NotUnitary : Error { using Error::Error; };
struct NotSpecialUnitary : Error { using Error::Error; };

// ---- solvers and verification -------------------------------------------

struct NoConvergence : Error { using Error::Error; };
struct EigensolverFailure : Error { using Error::Error; };
struct DegenerateRotationSample : Error { using Error::Error; };
struct InvalidN : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// A guaranteed internal property failed to hold; indicates a defect, not
// bad input.
struct InternalInvariantViolation : Error { using Error::Error; };

} // namespace ferro
