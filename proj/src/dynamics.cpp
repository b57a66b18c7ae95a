#include "mhc/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "mhc/csv.hpp"
#include "mhc/error.hpp"
#include "mhc/rng.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace mhc {

namespace {

bool all_finite(std::span<const double> v)
{
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

PathState initial_state(const Problem& problem, std::span<const double> w0, std::span<const double> z0)
{
    const std::size_t n = problem.n();
    require(w0.size() == n && z0.size() == n, ErrorKind::dimension_mismatch, "w0 and z0 need length n");
    require(all_finite(w0) && all_finite(z0), ErrorKind::invalid_argument, "w0 and z0 must be finite");
    PathState s;
    s.X.assign(n, 0.0);
    s.W.assign(w0.begin(), w0.end());
    s.Z.assign(z0.begin(), z0.end());
    s.dB.assign(problem.m(), 0.0);
    s.dB_Z.assign(problem.m_z(), 0.0);
    return s;
}

PathState step(const Problem& problem, const PathState& state, const IncentiveState& inc,
               std::span<const double> a, double dt)
{
    const std::size_t n = problem.n();
    require(dt > 0.0, ErrorKind::invalid_argument, "dt must be positive");
    require(a.size() == n && inc.y.size() == n && inc.c.size() == n && state.W.size() == n &&
                state.X.size() == n && state.Z.size() == n && state.dB.size() == problem.m() &&
                state.dB_Z.size() == problem.m_z(),
            ErrorKind::dimension_mismatch, "step: inconsistent state dimensions");
    for (std::size_t i = 0; i < n; ++i)
        require(a[i] >= -1e-12 && a[i] <= problem.a_max(i) + 1e-12, ErrorKind::out_of_domain,
                "step: action outside A");
    const double r = problem.r();
    const auto& sigma = problem.sigma();
    const auto& sigma_z = problem.sigma_z();
    PathState next = state;
    next.t = state.t + dt;
    for (std::size_t i = 0; i < n; ++i) {
        double shock = 0.0;
        for (std::size_t k = 0; k < problem.m(); ++k) shock += sigma(i, k) * state.dB[k];
        double shock_z = 0.0;
        for (std::size_t k = 0; k < problem.m_z(); ++k) shock_z += sigma_z(i, k) * state.dB_Z[k];
        next.X[i] += problem.drift(i, a) * dt + shock;
        next.W[i] += r * (state.W[i] - problem.utility(i, a, inc.c[i])) * dt + r * inc.y[i] * shock;
        next.Z[i] += r * problem.z_drift(i, a, inc.c) * dt + r * shock_z;
    }
    if (!all_finite(next.X) || !all_finite(next.W) || !all_finite(next.Z))
        fail(ErrorKind::nonfinite_state, "state became non-finite at t=" + format_double(next.t));
    std::fill(next.dB.begin(), next.dB.end(), 0.0);
    std::fill(next.dB_Z.begin(), next.dB_Z.end(), 0.0);
    return next;
}

Policy Policy::constant(IncentiveState inc, std::optional<std::vector<double>> forced_action)
{
    Policy p;
    p.constant_ = std::move(inc);
    p.forced_ = std::move(forced_action);
    return p;
}

Policy Policy::field(std::shared_ptr<const PolicyField> field)
{
    require(field && !field->slices.empty(), ErrorKind::policy_lookup, "policy field is empty");
    Policy p;
    p.field_ = std::move(field);
    return p;
}

Policy& Policy::with_nash(NashConfig cfg)
{
    nash_ = cfg;
    return *this;
}

void Policy::controls(double t, std::span<const double> w, std::span<const double> z, IncentiveState& inc) const
{
    if (!field_) {
        inc = constant_;
        return;
    }
    const std::size_t n = w.size();
    std::array<double, 2 * Grid::kMaxStateDims> state{};
    std::copy(w.begin(), w.end(), state.begin());
    std::copy(z.begin(), z.end(), state.begin() + static_cast<std::ptrdiff_t>(n));
    inc.y.resize(n);
    inc.c.resize(n);
    field_->controls(t, {state.data(), 2 * n}, inc.y, inc.c);
}

void Policy::evaluate(const Problem& problem, double t, std::span<const double> w, std::span<const double> z,
                      IncentiveState& inc, std::vector<double>& a) const
{
    controls(t, w, z, inc);
    require(inc.y.size() == problem.n() && inc.c.size() == problem.n(), ErrorKind::dimension_mismatch,
            "policy controls need length n");
    if (forced_) {
        a = *forced_;
        return;
    }
    a = nash_solve(problem, inc, nash_).action();
}

std::size_t step_count(double horizon, double dt)
{
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(horizon / dt)));
}

Estimate mean_and_se(std::span<const double> samples)
{
    Estimate e;
    if (samples.empty()) return e;
    const double count = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double v : samples) sum += v;
    e.mean = sum / count;
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double v : samples) ss += (v - e.mean) * (v - e.mean);
        e.se = std::sqrt(ss / (count - 1.0) / count);
    }
    return e;
}

SimulationBatch simulate_batch(const Problem& problem, const Policy& policy, const SimulationSettings& settings,
                               std::span<const double> w0, std::span<const double> z0, const StepVisitor& visitor)
{
    require(settings.n_paths >= 1, ErrorKind::invalid_argument, "n_paths must be at least 1");
    require(settings.dt > 0.0 && settings.dt <= problem.horizon(), ErrorKind::invalid_argument,
            "dt must satisfy 0 < dt <= T");
    const PathState start = initial_state(problem, w0, z0);
    const std::size_t n = problem.n();
    const std::size_t m = problem.m();
    const std::size_t mz = problem.m_z();
    const double r = problem.r();
    const double T = problem.horizon();

    SimulationBatch b;
    b.n = n;
    b.n_paths = settings.n_paths;
    b.steps = step_count(T, settings.dt);
    b.dt = T / static_cast<double>(b.steps);
    b.horizon = T;
    b.seed = settings.seed;
    b.w0.assign(w0.begin(), w0.end());
    b.z0.assign(z0.begin(), z0.end());
    b.agent_payoffs.assign(b.n_paths * n, 0.0);
    b.principal_payoffs.assign(b.n_paths, 0.0);
    b.terminal_W.assign(b.n_paths * n, 0.0);
    b.terminal_Z.assign(b.n_paths * n, 0.0);
    if (settings.keep_paths) b.paths.resize(b.n_paths);

    const double dt = b.dt;
    const double sqdt = std::sqrt(dt);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> failures(b.n_paths);
    std::vector<ErrorKind> failure_kinds(b.n_paths, ErrorKind::nonfinite_state);
    bool any_failed = false;

#if defined(_OPENMP)
    const int threads = settings.threads > 0 ? settings.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads) reduction(|| : any_failed)
#endif
    for (std::ptrdiff_t pj = 0; pj < static_cast<std::ptrdiff_t>(b.n_paths); ++pj) {
        const auto path = static_cast<std::size_t>(pj);
        std::size_t s = 0;
        try {
            PathState state = start;
            IncentiveState inc;
            std::vector<double> a;
            double* U = b.agent_payoffs.data() + path * n;
            double& UP = b.principal_payoffs[path];
            PathRecord* rec = settings.keep_paths ? &b.paths[path] : nullptr;
            if (rec) {
                const std::size_t rows = b.steps + 1;
                rec->t.reserve(rows);
                for (auto* v : {&rec->X, &rec->W, &rec->Z, &rec->a, &rec->c, &rec->y}) v->reserve(rows * n);
            }
            for (s = 0; s < b.steps; ++s) {
                state.t = dt * static_cast<double>(s);
                policy.evaluate(problem, state.t, state.W, state.Z, inc, a);
                const double disc = r * std::exp(-r * state.t) * dt;
                for (std::size_t i = 0; i < n; ++i) U[i] += disc * problem.utility(i, a, inc.c[i]);
                UP += disc * problem.principal_utility(a, inc.c);

                StreamRng rng(settings.seed, path, s);
                for (std::size_t k = 0; k < m; ++k) state.dB[k] = sqdt * rng.normal();
                for (std::size_t k = 0; k < mz; ++k) state.dB_Z[k] = sqdt * rng.normal();
                if (visitor) visitor(StepView{path, s, &state, &inc, &a});
                if (rec) {
                    rec->t.push_back(state.t);
                    rec->X.insert(rec->X.end(), state.X.begin(), state.X.end());
                    rec->W.insert(rec->W.end(), state.W.begin(), state.W.end());
                    rec->Z.insert(rec->Z.end(), state.Z.begin(), state.Z.end());
                    rec->a.insert(rec->a.end(), a.begin(), a.end());
                    rec->c.insert(rec->c.end(), inc.c.begin(), inc.c.end());
                    rec->y.insert(rec->y.end(), inc.y.begin(), inc.y.end());
                }
                state = step(problem, state, inc, a, dt);
            }
            state.t = T;
            const double disc_T = r * std::exp(-r * T);
            for (std::size_t i = 0; i < n; ++i) {
                const double phi = problem.terminal(i, state.Z[i]);
                U[i] += disc_T * phi;
                UP -= disc_T * phi;
                b.terminal_W[path * n + i] = state.W[i];
                b.terminal_Z[path * n + i] = state.Z[i];
            }
            if (rec) {
                rec->t.push_back(T);
                rec->X.insert(rec->X.end(), state.X.begin(), state.X.end());
                rec->W.insert(rec->W.end(), state.W.begin(), state.W.end());
                rec->Z.insert(rec->Z.end(), state.Z.begin(), state.Z.end());
                for (auto* v : {&rec->a, &rec->c, &rec->y}) v->insert(v->end(), n, nan);
            }
        } catch (const std::exception& e) {
            if (const auto* err = dynamic_cast<const Error*>(&e)) failure_kinds[path] = err->kind();
            failures[path] = "path " + std::to_string(path) + ", step " + std::to_string(s) + ": " + e.what();
            any_failed = true;
        }
    }
    if (any_failed) {
        for (std::size_t path = 0; path < b.n_paths; ++path)
            if (!failures[path].empty()) fail(failure_kinds[path], failures[path]);
    }
    b.estimates = payoff_estimates(problem, b);
    return b;
}

PayoffEstimates payoff_estimates(const Problem& problem, const SimulationBatch& batch)
{
    const std::size_t n = problem.n();
    require(batch.n == n && batch.agent_payoffs.size() == batch.n_paths * n, ErrorKind::dimension_mismatch,
            "batch does not match the problem");
    PayoffEstimates e;
    std::vector<double> col(batch.n_paths);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < batch.n_paths; ++p) col[p] = batch.agent_payoffs[p * n + i];
        e.agents.push_back(mean_and_se(col));
    }
    e.principal = mean_and_se(batch.principal_payoffs);
    return e;
}

void write_batch_csv(std::ostream& out, const SimulationBatch& batch)
{
    require(batch.paths.size() == batch.n_paths, ErrorKind::invalid_argument,
            "batch CSV needs a batch simulated with keep_paths");
    const std::size_t n = batch.n;
    out << "path,step,t[time]";
    const char* cols[] = {"X", "W", "Z", "a", "c", "y"};
    const char* units[] = {"output", "utility", "state", "action", "payoff_rate", "utility_per_output"};
    for (std::size_t k = 0; k < 6; ++k)
        for (std::size_t i = 0; i < n; ++i) out << ',' << cols[k] << '_' << i + 1 << '[' << units[k] << ']';
    out << '\n';
    for (std::size_t p = 0; p < batch.n_paths; ++p) {
        const auto& rec = batch.paths[p];
        for (std::size_t s = 0; s < rec.t.size(); ++s) {
            out << p << ',' << s << ',' << format_double(rec.t[s]);
            for (const auto* v : {&rec.X, &rec.W, &rec.Z, &rec.a, &rec.c, &rec.y})
                for (std::size_t i = 0; i < n; ++i) out << ',' << format_double((*v)[s * n + i]);
            out << '\n';
        }
    }
}

}  // namespace mhc
