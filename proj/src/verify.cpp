#include "mhc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <utility>

#include "json.hpp"
#include "mhc/csv.hpp"
#include "mhc/equilibrium.hpp"
#include "mhc/error.hpp"
#include "mhc/hjb.hpp"
#include "mhc/rng.hpp"

namespace mhc {

namespace {

constexpr std::uint64_t kSampleSalt = 0x5bd1e9955bd1e995ULL;

SimulationSettings settings_for(const AuditConfig& cfg, double dt)
{
    SimulationSettings s;
    s.n_paths = cfg.n_paths;
    s.dt = dt;
    s.seed = cfg.seed;
    s.threads = cfg.threads;
    return s;
}

}  // namespace

bool AuditReport::passed() const
{
    return promise.passed && ic.passed && participation.passed() && (!drift || drift->passed);
}

PromiseResult promise_keeping_check(const Problem& problem, const Policy& policy, std::span<const double> w0,
                                    std::span<const double> z0, const AuditConfig& cfg)
{
    const std::size_t n = problem.n();
    PromiseResult res;
    const auto fine = simulate_batch(problem, policy, settings_for(cfg, cfg.dt), w0, z0);
    res.dt = fine.dt;
    res.w0.assign(w0.begin(), w0.end());
    res.estimate = fine.estimates.agents;
    std::optional<SimulationBatch> coarse;
    if (2.0 * fine.dt <= problem.horizon() * (1.0 + 1e-12)) {
        coarse = simulate_batch(problem, policy, settings_for(cfg, 2.0 * fine.dt), w0, z0);
        res.coarse_dt = coarse->dt;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double u = res.estimate[i].mean;
        const double uc = coarse ? coarse->estimates.agents[i].mean : u;
        res.coarse_mean.push_back(uc);
        res.gap.push_back(std::abs(u - w0[i]));
        // first-order bias: U(2dt) - U(dt) estimates C dt
        res.allowance.push_back(std::abs(uc - u));
        res.tolerance.push_back(3.0 * res.estimate[i].se + res.allowance.back());
        res.agent_passed.push_back(res.gap.back() <= res.tolerance.back());
        res.passed = res.passed && res.agent_passed.back();
    }
    return res;
}

IcResult ic_audit(const Problem& problem, const Policy& policy, std::span<const double> w0,
                  std::span<const double> z0, const AuditConfig& cfg)
{
    const std::size_t n = problem.n();
    require(cfg.n_paths >= 1, ErrorKind::invalid_argument, "n_paths must be at least 1");
    const std::size_t steps = step_count(problem.horizon(), cfg.dt);
    // (step, sample) pairs per path
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> wanted(cfg.n_paths);
    for (std::size_t k = 0; k < cfg.deviations; ++k) {
        StreamRng rng(cfg.seed ^ kSampleSalt, k, 0);
        const auto path = std::min(cfg.n_paths - 1, static_cast<std::size_t>(rng.uniform() * cfg.n_paths));
        const auto step = std::min(steps - 1, static_cast<std::size_t>(rng.uniform() * steps));
        wanted[path].emplace_back(step, k);
    }
    std::vector<double> gains(cfg.deviations * n, 0.0);
    auto visitor = [&](const StepView& v) {
        for (const auto& [step, k] : wanted[v.path]) {
            if (step != v.step) continue;
            const auto g = verify_nash(problem, *v.a, *v.inc, 201);
            std::copy(g.begin(), g.end(), gains.begin() + static_cast<std::ptrdiff_t>(k * n));
        }
    };
    simulate_batch(problem, policy, settings_for(cfg, cfg.dt), w0, z0, visitor);

    IcResult res;
    res.samples = cfg.deviations;
    res.tolerance = cfg.ic_tol + cfg.ic_allowance;
    res.max_gain.assign(n, 0.0);
    for (std::size_t k = 0; k < cfg.deviations; ++k)
        for (std::size_t i = 0; i < n; ++i) res.max_gain[i] = std::max(res.max_gain[i], gains[k * n + i]);
    for (std::size_t i = 0; i < n; ++i) {
        res.agent_passed.push_back(res.max_gain[i] <= res.tolerance);
        res.passed = res.passed && res.agent_passed.back();
    }
    return res;
}

ParticipationResult participation_check(const Problem& problem, const Policy& policy, std::span<const double> w0,
                                        std::span<const double> z0, const AuditConfig& cfg)
{
    const std::size_t n = problem.n();
    std::vector<double> min_u(cfg.n_paths * n, std::numeric_limits<double>::infinity());
    auto visitor = [&](const StepView& v) {
        for (std::size_t i = 0; i < n; ++i) {
            double& slot = min_u[v.path * n + i];
            slot = std::min(slot, problem.utility(i, *v.a, v.inc->c[i]));
        }
    };
    const auto batch = simulate_batch(problem, policy, settings_for(cfg, cfg.dt), w0, z0, visitor);
    ParticipationResult res;
    res.ir_values = batch.estimates.agents;
    res.instantaneous_tol = cfg.instantaneous_tol;
    res.min_instantaneous.assign(n, std::numeric_limits<double>::infinity());
    for (std::size_t p = 0; p < cfg.n_paths; ++p)
        for (std::size_t i = 0; i < n; ++i)
            res.min_instantaneous[i] = std::min(res.min_instantaneous[i], min_u[p * n + i]);
    for (std::size_t i = 0; i < n; ++i) {
        res.ir_tolerance.push_back(cfg.ir_tol + 3.0 * res.ir_values[i].se);
        res.ir_passed = res.ir_passed && res.ir_values[i].mean >= -res.ir_tolerance.back();
        res.instantaneous_passed = res.instantaneous_passed && res.min_instantaneous[i] >= -cfg.instantaneous_tol;
    }
    return res;
}

TerminalGapStats terminal_gaps(const Problem& problem, const SimulationBatch& batch)
{
    const std::size_t n = problem.n();
    TerminalGapStats s;
    s.z_noise = !problem.sigma_z().is_zero();
    s.mean.assign(n, 0.0);
    s.max.assign(n, 0.0);
    for (std::size_t p = 0; p < batch.n_paths; ++p)
        for (std::size_t i = 0; i < n; ++i) {
            const double gap = std::abs(batch.terminal_W[p * n + i] -
                                        problem.r() * problem.terminal(i, batch.terminal_Z[p * n + i]));
            s.mean[i] += gap / static_cast<double>(batch.n_paths);
            s.max[i] = std::max(s.max[i], gap);
        }
    return s;
}

DriftStats drift_check(const Problem& problem, const ValueField& value, const Policy& policy,
                       std::span<const double> w0, std::span<const double> z0, const AuditConfig& cfg)
{
    std::vector<double> sums(cfg.n_paths, 0.0);
    std::vector<std::size_t> counts(cfg.n_paths, 0);
    auto visitor = [&](const StepView& v) {
        DriftPoint pt{v.state->t, v.state->W, v.state->Z, *v.inc, *v.a};
        sums[v.path] += principal_value_drift(problem, value, pt);
        ++counts[v.path];
    };
    simulate_batch(problem, policy, settings_for(cfg, cfg.dt), w0, z0, visitor);
    std::vector<double> per_path(cfg.n_paths);
    DriftStats s;
    for (std::size_t p = 0; p < cfg.n_paths; ++p) {
        per_path[p] = sums[p] / static_cast<double>(std::max<std::size_t>(1, counts[p]));
        s.points += counts[p];
    }
    s.drift = mean_and_se(per_path);
    s.allowance = cfg.drift_allowance;
    s.tolerance = 3.0 * s.drift.se + s.allowance;
    s.passed = std::abs(s.drift.mean) <= s.tolerance;
    return s;
}

AuditReport run_audit(const Problem& problem, const Policy& policy, std::span<const double> w0,
                      std::span<const double> z0, const AuditConfig& cfg, const ValueField* value)
{
    AuditReport r;
    r.config = cfg;
    r.promise = promise_keeping_check(problem, policy, w0, z0, cfg);
    r.ic = ic_audit(problem, policy, w0, z0, cfg);
    r.participation = participation_check(problem, policy, w0, z0, cfg);
    r.terminal = terminal_gaps(problem, simulate_batch(problem, policy, settings_for(cfg, cfg.dt), w0, z0));
    if (value) r.drift = drift_check(problem, *value, policy, w0, z0, cfg);
    return r;
}

std::string audit_json(const AuditReport& r)
{
    using nlohmann::json;
    auto estimates = [](const std::vector<Estimate>& v) {
        json a = json::array();
        for (const auto& e : v) a.push_back({{"mean", e.mean}, {"se", e.se}});
        return a;
    };
    json j;
    j["passed"] = r.passed();
    j["config"] = {{"n_paths", r.config.n_paths}, {"dt", r.config.dt},       {"seed", r.config.seed},
                   {"deviations", r.config.deviations}, {"ic_tol", r.config.ic_tol},
                   {"ic_allowance", r.config.ic_allowance}, {"ir_tol", r.config.ir_tol},
                   {"instantaneous_tol", r.config.instantaneous_tol},
                   {"drift_allowance", r.config.drift_allowance}};
    j["promise_keeping"] = {{"passed", r.promise.passed},        {"dt", r.promise.dt},
                            {"coarse_dt", r.promise.coarse_dt},  {"w0", r.promise.w0},
                            {"estimate", estimates(r.promise.estimate)},
                            {"coarse_mean", r.promise.coarse_mean}, {"gap", r.promise.gap},
                            {"allowance", r.promise.allowance},  {"tolerance", r.promise.tolerance},
                            {"agent_passed", r.promise.agent_passed}};
    j["incentive_compatibility"] = {{"passed", r.ic.passed},       {"max_gain", r.ic.max_gain},
                                    {"tolerance", r.ic.tolerance}, {"samples", r.ic.samples},
                                    {"agent_passed", r.ic.agent_passed}};
    j["participation"] = {{"ir_passed", r.participation.ir_passed},
                          {"ir_values", estimates(r.participation.ir_values)},
                          {"ir_tolerance", r.participation.ir_tolerance},
                          {"instantaneous_passed", r.participation.instantaneous_passed},
                          {"min_instantaneous", r.participation.min_instantaneous},
                          {"instantaneous_tol", r.participation.instantaneous_tol}};
    j["terminal_gaps"] = {{"mean", r.terminal.mean}, {"max", r.terminal.max},
                          {"z_noise", r.terminal.z_noise}, {"asserted", false}};
    if (r.drift)
        j["drift"] = {{"mean", r.drift->drift.mean}, {"se", r.drift->drift.se},     {"points", r.drift->points},
                      {"allowance", r.drift->allowance}, {"tolerance", r.drift->tolerance},
                      {"passed", r.drift->passed}};
    return j.dump(2);
}

void write_audit_csv(std::ostream& out, const AuditReport& r)
{
    out << "check,agent,value[payoff],se[payoff],tolerance[payoff],passed\n";
    auto row = [&](const char* check, std::size_t agent, double value, double se, double tol, bool passed) {
        out << check << ',' << agent << ',' << format_double(value) << ',' << format_double(se) << ','
            << format_double(tol) << ',' << (passed ? 1 : 0) << '\n';
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < r.promise.gap.size(); ++i)
        row("promise_gap", i + 1, r.promise.gap[i], r.promise.estimate[i].se, r.promise.tolerance[i],
            r.promise.agent_passed[i]);
    for (std::size_t i = 0; i < r.ic.max_gain.size(); ++i)
        row("ic_gain", i + 1, r.ic.max_gain[i], nan, r.ic.tolerance, r.ic.agent_passed[i]);
    for (std::size_t i = 0; i < r.participation.ir_values.size(); ++i)
        row("ir_value", i + 1, r.participation.ir_values[i].mean, r.participation.ir_values[i].se,
            r.participation.ir_tolerance[i], r.participation.ir_values[i].mean >= -r.participation.ir_tolerance[i]);
    for (std::size_t i = 0; i < r.participation.min_instantaneous.size(); ++i)
        row("min_instantaneous_u", i + 1, r.participation.min_instantaneous[i], nan,
            r.participation.instantaneous_tol,
            r.participation.min_instantaneous[i] >= -r.participation.instantaneous_tol);
    for (std::size_t i = 0; i < r.terminal.mean.size(); ++i)
        row("terminal_gap_mean", i + 1, r.terminal.mean[i], nan, nan, true);
    if (r.drift)
        row("drift_mean", 0, r.drift->drift.mean, r.drift->drift.se, r.drift->tolerance, r.drift->passed);
}

}  // namespace mhc
