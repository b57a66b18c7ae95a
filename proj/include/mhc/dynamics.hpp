#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mhc/equilibrium.hpp"
#include "mhc/grid.hpp"
#include "mhc/model.hpp"

namespace mhc {

// dB and dB_Z are the increments applied over [t, t + dt].
struct PathState {
    double t = 0.0;
    std::vector<double> X;
    std::vector<double> W;
    std::vector<double> Z;
    std::vector<double> dB;
    std::vector<double> dB_Z;
};

PathState initial_state(const Problem& problem, std::span<const double> w0, std::span<const double> z0);

// One Euler-Maruyama step; the returned state carries zeroed increments.
PathState step(const Problem& problem, const PathState& state, const IncentiveState& inc,
               std::span<const double> a, double dt);

// Where (y, c) and a come from at each step: a constant incentive state or an
// interpolated PolicyField. a is the selected equilibrium unless forced.
class Policy {
public:
    static Policy constant(IncentiveState inc, std::optional<std::vector<double>> forced_action = {});
    static Policy field(std::shared_ptr<const PolicyField> field);

    // Equilibrium solves inside simulation skip certification by default;
    // audits certify separately at sampled points.
    Policy& with_nash(NashConfig cfg);

    bool is_constant() const noexcept { return !field_; }
    const PolicyField* policy_field() const noexcept { return field_.get(); }
    const std::optional<std::vector<double>>& forced_action() const noexcept { return forced_; }

    void controls(double t, std::span<const double> w, std::span<const double> z, IncentiveState& inc) const;
    void evaluate(const Problem& problem, double t, std::span<const double> w, std::span<const double> z,
                  IncentiveState& inc, std::vector<double>& a) const;

private:
    IncentiveState constant_;
    std::optional<std::vector<double>> forced_;
    std::shared_ptr<const PolicyField> field_;
    NashConfig nash_ = [] {
        NashConfig c;
        c.certify = false;
        return c;
    }();
};

struct SimulationSettings {
    std::size_t n_paths = 1000;
    double dt = 0.01;
    std::uint64_t seed = 0;
    bool keep_paths = false;
    int threads = 0;
};

// One path, rows 0..steps; row-major n entries per row. Controls on the last
// row are NaN (no step is taken from T).
struct PathRecord {
    std::vector<double> t;
    std::vector<double> X, W, Z;
    std::vector<double> a, c, y;
};

// Read-only view of one simulated step handed to a visitor before the step is applied.
struct StepView {
    std::size_t path = 0;
    std::size_t step = 0;
    const PathState* state = nullptr;
    const IncentiveState* inc = nullptr;
    const std::vector<double>* a = nullptr;
};
// May be called concurrently for different paths, never for the same path.
using StepVisitor = std::function<void(const StepView&)>;

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
};

struct PayoffEstimates {
    std::vector<Estimate> agents;
    Estimate principal;
};

struct SimulationBatch {
    std::size_t n = 0;
    std::size_t n_paths = 0;
    std::size_t steps = 0;
    double dt = 0.0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> w0, z0;
    std::vector<PathRecord> paths;  // empty unless keep_paths
    // per-path realised discounted payoffs (n_paths x n) and principal payoff
    std::vector<double> agent_payoffs;
    std::vector<double> principal_payoffs;
    // per-path W(T), Z(T) (n_paths x n)
    std::vector<double> terminal_W, terminal_Z;
    PayoffEstimates estimates;
};

// Number of steps for a requested dt: round(T / dt), at least 1.
std::size_t step_count(double horizon, double dt);

SimulationBatch simulate_batch(const Problem& problem, const Policy& policy, const SimulationSettings& settings,
                               std::span<const double> w0, std::span<const double> z0,
                               const StepVisitor& visitor = {});

PayoffEstimates payoff_estimates(const Problem& problem, const SimulationBatch& batch);

Estimate mean_and_se(std::span<const double> samples);

// One row per (path, step); requires keep_paths.
void write_batch_csv(std::ostream& out, const SimulationBatch& batch);

}  // namespace mhc
