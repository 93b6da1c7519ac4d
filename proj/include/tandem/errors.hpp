#pragma once

#include <stdexcept>
#include <string>

namespace tandem {

// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// se2: interpolation segment shorter than the degeneracy epsilon.
struct DegenerateSegment : Error {
    using Error::Error;
};

// image: zero/negative target dimensions, or upscaling request.
struct InvalidDimensions : Error {
    using Error::Error;
};

// ncc / controller: reference and query sizes differ.
struct DimensionMismatch : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// route: malformed manifest or PGM payload.
struct FormatError : Error {
    using Error::Error;
};

// route: manifest references an image file that does not exist.
struct MissingImage : Error {
    using Error::Error;
};

// route: manifest version string is not recognised.
struct VersionError : Error {
    using Error::Error;
};

// controller: global initialisation found no keyframe above threshold.
struct NotOnRoute : Error {
    using Error::Error;
};

struct UnknownWorld : Error {
    using Error::Error;
};

// transfer: target field of view exceeds the source's.
struct IncompatibleFov : Error {
    using Error::Error;
};

// teach: controller failed to converge on a waypoint in time.
struct UnreachableWaypoint : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace tandem
