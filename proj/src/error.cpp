#include "mhc/error.hpp"

namespace mhc {

std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::dimension_mismatch: return "dimension_mismatch";
    case ErrorKind::domain_empty: return "domain_empty";
    case ErrorKind::out_of_domain: return "out_of_domain";
    case ErrorKind::derivative_floor: return "derivative_floor";
    case ErrorKind::empty_interval: return "empty_interval";
    case ErrorKind::non_monotone: return "non_monotone";
    case ErrorKind::no_convergence: return "no_convergence";
    case ErrorKind::certification_failed: return "certification_failed";
    case ErrorKind::nonfinite_state: return "nonfinite_state";
    case ErrorKind::policy_lookup: return "policy_lookup";
    case ErrorKind::stability: return "stability";
    case ErrorKind::node_failure: return "node_failure";
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::parse: return "parse";
    case ErrorKind::semantic: return "semantic";
    case ErrorKind::unknown_key: return "unknown_key";
    case ErrorKind::io: return "io";
    }
    return "unknown";
}

}  // namespace mhc
