#pragma once

#include <stdexcept>
#include <string>

namespace coopnav {

/// Query point outside a map's coverage extent.
struct OutOfBoundsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid synthetic-map or trial specification.
struct InvalidSpecError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Malformed grid or config file; message carries line/field context.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Grid header and body disagree on dimensions.
struct DimensionMismatchError : ParseError {
    using ParseError::ParseError;
};

/// Two packets carried different values for the same (step, uav, field).
/// Honest re-broadcast can never conflict, so this signals a simulator bug.
struct ConflictingEntryError : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace coopnav
