#pragma once

#include <stdexcept>
#include <string>

namespace bevmotion {

// Error taxonomy shared by the whole library. The C API maps these onto
// its status codes, the CLI onto exit codes.
enum class ErrorKind {
    config,            // invalid or unparseable configuration
    io,                // missing/unwritable/truncated files
    version,           // file format major version mismatch
    checksum,          // payload CRC mismatch
    invalid_pose,      // non-orthonormal rotation
    shape,             // dimension mismatch between inputs
    empty_input,       // operation undefined on empty input
    invalid_cache,     // backward called with a stale forward cache
    unsupported,       // request outside an operation's supported domain
    solver_failure,    // numeric breakdown in an iterative solver
    numeric,           // other numeric failure (overflow, non-finite)
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace bevmotion
