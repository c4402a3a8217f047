#pragma once

#include <stdexcept>
#include <string>

namespace sfo {

// Base class for all domain errors thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// geometry
struct NonPositiveDepth : Error { using Error::Error; };
struct NotARotation : Error { using Error::Error; };
struct EmptyResult : Error { using Error::Error; };
struct InvalidMesh : Error { using Error::Error; };

// soft-tissue cones
struct DegenerateAxis : Error { using Error::Error; };
struct MissingSpec : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };

// projection solver
struct DegenerateConfiguration : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };

// contour pipeline
struct MissingLandmark : Error { using Error::Error; };
struct TooSmallProjection : Error { using Error::Error; };
struct AllIsolated : Error { using Error::Error; };
struct NoIntersection : Error { using Error::Error; };

// fitness / evaluation
struct DimensionMismatch : Error { using Error::Error; };
struct TooFewVisible : Error { using Error::Error; };
struct NotConverged : Error { using Error::Error; };
struct EmptySkullMask : Error { using Error::Error; };

// synthetic data
struct InvalidMorphology : Error { using Error::Error; };

// persistence
struct IoError : Error { using Error::Error; };
struct ManifestError : Error { using Error::Error; };

}  // namespace sfo
