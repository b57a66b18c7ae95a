#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mhc {

enum class ErrorKind {
    dimension_mismatch,
    domain_empty,
    out_of_domain,
    derivative_floor,
    empty_interval,
    non_monotone,
    no_convergence,
    certification_failed,
    nonfinite_state,
    policy_lookup,
    stability,
    node_failure,
    invalid_argument,
    parse,
    semantic,
    unknown_key,
    io,
};

std::string_view to_string(ErrorKind kind);

// Every module reports failures through this type; `kind` is what the CLI
// writes into its machine-readable error record.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message)
{
    throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message)
{
    if (!condition) throw Error(kind, message);
}

}  // namespace mhc
