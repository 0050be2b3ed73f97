#pragma once

#include <stdexcept>
#include <string>

namespace tiling {

/// Base class for all library errors.
class TilingError : public std::runtime_error {
public:
    explicit TilingError(const std::string& msg) : std::runtime_error(msg) {}
};

#define TILING_DEFINE_ERROR(NAME)                                          \
    class NAME : public TilingError {                                      \
    public:                                                                \
        explicit NAME(const std::string& msg) : TilingError(#NAME ": " + msg) {} \
    }

// mesh construction / lookup
TILING_DEFINE_ERROR(DanglingReference);
TILING_DEFINE_ERROR(OpenBoundaryWalk);
TILING_DEFINE_ERROR(NonManifoldEdge);
TILING_DEFINE_ERROR(UnknownNode);
TILING_DEFINE_ERROR(UnknownFace);

// geometry
TILING_DEFINE_ERROR(DegenerateArc);
TILING_DEFINE_ERROR(BadPairIndex);
TILING_DEFINE_ERROR(DegeneracyOverflow);
TILING_DEFINE_ERROR(OpenTrace);

// metrics
TILING_DEFINE_ERROR(SingularDenominator);
TILING_DEFINE_ERROR(BallExceedsPatch);

// generators
TILING_DEFINE_ERROR(InvalidSpec);
TILING_DEFINE_ERROR(SeedCollision);
TILING_DEFINE_ERROR(OutOfDomain);

// deregularization
TILING_DEFINE_ERROR(InfeasibleTarget);
TILING_DEFINE_ERROR(GeometryCollision);
TILING_DEFINE_ERROR(ZeroCornerDegree);

// monohedral
TILING_DEFINE_ERROR(NotMonohedral);

// io
TILING_DEFINE_ERROR(ParseError);
TILING_DEFINE_ERROR(VersionMismatch);
TILING_DEFINE_ERROR(IoError);

#undef TILING_DEFINE_ERROR

}  // namespace tiling
