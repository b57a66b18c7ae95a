#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mhc/equilibrium.hpp"
#include "mhc/grid.hpp"
#include "mhc/model.hpp"

namespace mhc {

struct SearchConfig {
    std::size_t coarse_points = 9;  // per (y_i, c_i) dimension
    std::size_t refine_starts = 3;
    double simplex_tol = 1e-9;      // simplex diameter, relative to the box size
    std::size_t max_evals = 400;    // per Nelder-Mead run
    double tie_tol = 1e-9;
    NashConfig nash;
};

// argmax of G(y, c) = r u_P(a(y, c), c) + H^y F at one node
struct NodeControl {
    std::vector<double> y;
    std::vector<double> c;
    std::vector<double> a;
    double value = 0.0;
    bool multiple = false;
};

// F(T, w, z) = -r sum_i Phi_i(z_i)
std::vector<double> terminal_condition(const Problem& problem, const Grid& grid);

// Discretised H^y F at a node for controls (y, c) and actions a.
double apply_operator(const Problem& problem, const Grid& grid, std::span<const double> slice,
                      std::size_t node, const IncentiveState& inc, std::span<const double> a);

// F-independent work shared by every node of a solve: y bounds and the Nash
// equilibria at each coarse (y, c) point, since Theta depends only on (y, c).
class ControlSearch {
public:
    ControlSearch(const Problem& problem, SearchConfig cfg);
    ~ControlSearch();
    ControlSearch(ControlSearch&&) noexcept;
    ControlSearch& operator=(ControlSearch&&) noexcept;

    const YBounds& bounds() const;
    const SearchConfig& config() const;

    // G(y, c) at a node; a is the selected equilibrium at (y, c).
    double objective(const Grid& grid, std::span<const double> slice, std::size_t node,
                     const IncentiveState& inc, std::span<const double> a) const;
    NodeControl maximize(const Grid& grid, std::span<const double> slice, std::size_t node) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

NodeControl inner_max(const Problem& problem, const Grid& grid, std::span<const double> slice,
                      std::size_t node, const SearchConfig& cfg = {});

// 1 / (sum_k [r |mu_k|_max / dx_k + r^2 (diffusion)_kk,max / dx_k^2] + r)
double stability_bound(const Problem& problem, const Grid& grid, const YBounds& bounds);

struct Solution {
    ValueField value;
    PolicyField policy;
};

struct SolveOptions {
    bool check_stability = true;
    int threads = 0;  // 0: OpenMP default
    // Called after each completed slice k (k = t_steps - 1 down to 0); used for
    // checkpointing.
    std::function<void(std::size_t k, const Solution&)> on_slice;
};

// Explicit backward sweep F(t - dt) = F(t) + dt (H*(t) - r F(t)). Passing a
// partially computed Solution resumes from its lowest completed slice.
Solution backward_solve(const Problem& problem, const Grid& grid, const SearchConfig& cfg = {},
                        const SolveOptions& options = {}, Solution* resume = nullptr);

// State and controls of one simulated step, for the drift diagnostic.
struct DriftPoint {
    double t = 0.0;
    std::vector<double> w;
    std::vector<double> z;
    IncentiveState inc;
    std::vector<double> a;
};

// e^{-rt} [dF/dt + r u_P + H^y F - r F] at a point, interpolated from the
// surrounding grid nodes of the slice pair bracketing t.
double principal_value_drift(const Problem& problem, const ValueField& value, const DriftPoint& point);
std::vector<double> principal_value_drift(const Problem& problem, const ValueField& value,
                                          std::span<const DriftPoint> path);

}  // namespace mhc
