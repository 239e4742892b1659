#pragma once

#include <stdexcept>
#include <string>

namespace puc {

/// Machine-readable failure categories, mirrored one-to-one by the C API
/// status codes.
enum class Status {
    ok = 0,
    invalid_argument,   // bad handle, null pointer, malformed call
    domain_error,       // physical/numerical preconditions violated
    boundary_error,     // extremum at a grid edge, window outside trace
    fit_error,          // infeasible anchors or rank-deficient fit
    no_echo,            // correlation peak below detection threshold
    config_error,       // scenario document invalid
    io_error,           // file missing or unreadable
    internal_error,     // non-finite intermediate, broken invariant
};

constexpr const char* status_name(Status s) {
    switch (s) {
        case Status::ok: return "ok";
        case Status::invalid_argument: return "invalid_argument";
        case Status::domain_error: return "domain_error";
        case Status::boundary_error: return "boundary_error";
        case Status::fit_error: return "fit_error";
        case Status::no_echo: return "no_echo";
        case Status::config_error: return "config_error";
        case Status::io_error: return "io_error";
        case Status::internal_error: return "internal_error";
    }
    return "unknown";
}

/// Exception carrying a Status so the C boundary can translate without
/// string matching.
class Error : public std::runtime_error {
public:
    Error(Status status, std::string message)
        : std::runtime_error(std::move(message)), status_(status) {}

    Status status() const noexcept { return status_; }

private:
    Status status_;
};

[[noreturn]] inline void raise(Status status, const std::string& message) {
    throw Error(status, message);
}

} // namespace puc
