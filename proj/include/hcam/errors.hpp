#pragma once

#include <stdexcept>
#include <string>

namespace hcam {

// Domain error types. Each maps to one failure mode named in the module
// contracts; catching hcam::Error catches all of them.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CyclicStructure : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct InvalidDensity : Error {
    using Error::Error;
};
struct DegenerateColumn : Error {
    using Error::Error;
};
struct SingularSystem : Error {
    using Error::Error;
};
struct UnknownTail : Error {
    using Error::Error;
};
struct NumericalInstability : Error {
    using Error::Error;
};
struct DimensionGuard : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct InvalidConfig : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

}  // namespace hcam
