#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mhc/model.hpp"

namespace mhc {

// The principal's per-time controls: continuation-value sensitivities y and
// compensation rates c, one entry per agent.
struct IncentiveState {
    std::vector<double> y;
    std::vector<double> c;
};

struct YInterval {
    double beta = 0.0;
    double gamma = 0.0;
};

struct YBounds {
    std::vector<double> beta;
    std::vector<double> gamma;
};

struct NashConfig {
    double damping = 0.5;
    double fp_tol = 1e-10;
    double dev_tol = 1e-6;
    double dedup_tol = 1e-8;
    std::size_t starts = 8;
    std::size_t max_iter = 10'000;
    std::size_t verify_grid = 201;
    // Run verify_nash on every converged point; inner optimisation loops
    // switch this off and certify only the final answer.
    bool certify = true;
};

struct EquilibriumResult {
    std::vector<std::vector<double>> equilibria;
    std::vector<double> residuals;
    std::vector<std::vector<double>> deviation_gains;  // empty rows when not certified
    std::vector<double> scores;
    std::size_t selected = 0;
    bool multiple = false;

    const std::vector<double>& action() const { return equilibria[selected]; }
};

// Scores an equilibrium for selection; the default is u_P(a, c).
using EquilibriumScore = std::function<double(std::span<const double> a)>;

// g_i(x) = -du_i/da_i / df_i/da_i evaluated at (a_-i, x).
double g_eval(const Problem& problem, std::size_t i, std::span<const double> a, double c_i, double x);

YInterval y_bounds(const Problem& problem, std::size_t i, std::size_t samples = 64);
YBounds y_bounds(const Problem& problem);

// Maximiser of y_i f_i(a_-i, x) + u_i(a_-i, x, c_i) over [0, a_max_i] via the
// monotone first-order condition g_i(x) = y_i, clamped at the endpoints.
double best_response(const Problem& problem, std::size_t i, std::span<const double> a, double c_i,
                     double y_i);

// y_i f_i(a_-i, x) + u_i(a_-i, x, c_i)
double agent_objective(const Problem& problem, std::size_t i, std::span<const double> a, double c_i,
                       double y_i, double x);

EquilibriumResult nash_solve(const Problem& problem, const IncentiveState& inc,
                             const NashConfig& cfg = {}, const EquilibriumScore& score = {});

// Per-agent gain of the best unilateral deviation from a.
std::vector<double> verify_nash(const Problem& problem, std::span<const double> a,
                                const IncentiveState& inc, std::size_t grid_points = 201);

}  // namespace mhc
