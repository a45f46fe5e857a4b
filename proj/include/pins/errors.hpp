#pragma once

#include <stdexcept>
#include <string>

namespace pins {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user-supplied values: dimension mismatches, non-positive masses,
// NaN coordinates, malformed configs.
struct InvalidInput : Error {
    using Error::Error;
};

// Failure of an external PES process; the message carries protocol context
// (command, last line seen, what was expected).
struct ExternalPesError : Error {
    using Error::Error;
};

}  // namespace pins
