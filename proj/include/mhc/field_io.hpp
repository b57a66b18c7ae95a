#pragma once

#include <iosfwd>
#include <string>

#include "mhc/hjb.hpp"

namespace mhc {

// One row per (time index, node): t, w..., z..., F, y*..., c*..., a*...,
// multiple, H*. Rows of the terminal slice carry NaN controls.
void write_solution_csv(std::ostream& out, const Solution& solution);

// Binary cache for resuming solves: "MHCF", format version, grid, progress,
// then every slice in native byte order.
inline constexpr unsigned kCacheVersion = 1;
void save_solution(const std::string& path, const Solution& solution);
Solution load_solution(const std::string& path);

}  // namespace mhc
