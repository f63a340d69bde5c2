#pragma once

#include <stdexcept>
#include <string>

namespace bsca {

// Every failure in the core is a bsca::Error carrying one of these codes.
// The numeric values are part of the C API (see bsca.h) and must not change.
enum class ErrorCode : int {
    config = 1,
    parse = 2,
    domain = 3,
    collinear = 4,
    singular_design = 5,
    insufficient_data = 6,
    separation = 7,
    nonconvergence = 8,
    no_valid_model = 9,
    cap_exceeded = 10,
    family = 11,
    io = 12,
    invalid_argument = 13,
    empty_curve = 14,
    degenerate_subgroup = 15,
    unsupported = 16,
    internal = 99,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace bsca
