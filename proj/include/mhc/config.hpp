#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mhc/equilibrium.hpp"
#include "mhc/hjb.hpp"
#include "mhc/model.hpp"
#include "mhc/verify.hpp"

namespace mhc {

struct GridConfig {
    std::vector<double> w_max;
    std::size_t w_points = 11;
    std::vector<double> z_min;
    std::vector<double> z_max;  // empty: cover reachable Z under the drift bound
    std::size_t z_points = 11;
    std::size_t t_steps = 0;    // 0: smallest stable step count
    std::size_t checkpoint_every = 0;
    bool resume = false;
};

struct SimulationConfig {
    std::size_t n_paths = 1000;
    double dt = 0.01;
    std::uint64_t seed = 0;
    std::vector<double> w0;
    std::vector<double> z0;
    std::string policy = "constant";  // or "field"
    IncentiveState incentives;
    std::optional<std::vector<double>> forced_action;
    bool keep_paths = true;
};

struct RunConfig {
    std::string mode;  // empty when the config does not name one
    ProblemSpec problem;
    std::size_t validation_samples = 256;
    NashConfig nash;
    std::optional<IncentiveState> incentives;  // the equilibrium section's (y, c)
    std::optional<GridConfig> grid;
    SearchConfig search;
    SimulationConfig simulation;
    AuditConfig audit;
    std::string out_dir;
    bool write_cache = true;
    // the configuration with every default filled in, as JSON text
    std::string echo;
};

// Errors: parse (with line and column), semantic (naming the key),
// unknown_key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

}  // namespace mhc
