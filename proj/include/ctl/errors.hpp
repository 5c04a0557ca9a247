#pragma once

#include <stdexcept>
#include <string>

namespace ctl {

// Every failure raised by the toolkit derives from ctl::Error so that callers
// (notably the CLI) can map the whole family onto one exit code.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };       // bad resolution, bad option
struct DomainError : Error { using Error::Error; };       // parameter outside its domain
struct DimensionError : Error { using Error::Error; };    // grid mismatch
struct DegeneracyError : Error { using Error::Error; };   // vanishing wedge / det g
struct ConsistencyError : Error { using Error::Error; };  // flag contradicts data
struct ContractError : Error { using Error::Error; };     // precondition violated
struct GeometryError : Error { using Error::Error; };     // impossible geometry for a torus
struct InputError : Error { using Error::Error; };        // malformed user-supplied data
struct ConstructionError : Error { using Error::Error; }; // constructor could not build a valid object

// Raised by the CTL1 reader; `version_mismatch` distinguishes a foreign
// format revision from plain corruption.
struct ParseError : Error {
    explicit ParseError(const std::string& msg, bool version_mismatch = false)
        : Error(msg), version_mismatch(version_mismatch) {}
    bool version_mismatch;
};

} // namespace ctl
