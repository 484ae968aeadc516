#include "bevmotion/error.hpp"

namespace bevmotion {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config: return "config";
        case ErrorKind::io: return "io";
        case ErrorKind::version: return "version";
        case ErrorKind::checksum: return "checksum";
        case ErrorKind::invalid_pose: return "invalid-pose";
        case ErrorKind::shape: return "shape";
        case ErrorKind::empty_input: return "empty-input";
        case ErrorKind::invalid_cache: return "invalid-cache";
        case ErrorKind::unsupported: return "unsupported";
        case ErrorKind::solver_failure: return "solver-failure";
        case ErrorKind::numeric: return "numeric";
    }
    return "unknown";
}

}  // namespace bevmotion
