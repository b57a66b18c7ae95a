#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "mhc/config.hpp"

namespace mhc {

enum class Mode { equilibrium, solve, simulate, audit };

Mode mode_from_string(std::string_view name);
std::string_view to_string(Mode mode);

struct RunOptions {
    std::string mode;     // overrides the config's mode when non-empty
    std::string out_dir;  // overrides the config's outputs.dir when non-empty
    std::optional<std::uint64_t> seed;
    int threads = 0;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 2;
inline constexpr int kExitAuditFailed = 3;

// Resolves the output directory: option, then config, then the MHC_OUT_DIR
// environment variable, then "mhc_out".
std::string resolve_out_dir(const RunConfig& config, const RunOptions& options);

// Runs one mode, writes its artifacts and manifest.json, and returns the exit
// status. Module errors propagate after the manifest records them.
int run(const RunConfig& config, const RunOptions& options, std::ostream& out);

// {"error": {"kind": ..., "message": ...}} on one line
std::string error_record(std::string_view kind, std::string_view message);

}  // namespace mhc
