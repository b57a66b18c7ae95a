#include "mhc/run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>

#include "json.hpp"
#include "mhc/dynamics.hpp"
#include "mhc/error.hpp"
#include "mhc/field_io.hpp"
#include "mhc/hjb.hpp"
#include "mhc/quasi_random.hpp"
#include "mhc/verify.hpp"

namespace mhc {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fixed8(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.8f", v);
    return buf;
}

std::string tuple(const std::vector<double>& v)
{
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fixed8(v[i]);
    return s + ")";
}

std::ofstream open_artifact(const fs::path& path, json& manifest)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + path.string());
    manifest["artifacts"].push_back(path.filename().string());
    return out;
}

Grid build_grid(const Problem& problem, const RunConfig& cfg)
{
    const auto& gc = *cfg.grid;
    const std::size_t n = problem.n();
    std::vector<Axis> w(n), z(n);
    std::vector<double> zmax = gc.z_max;
    if (zmax.empty()) {
        // reachable Z under the largest drift over A x C, plus three noise sd
        std::vector<double> lo(2 * n, 0.0), hi(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            hi[i] = problem.a_max(i);
            hi[n + i] = problem.c_max(i);
        }
        zmax = gc.z_min;
        for (const auto& s : box_samples(lo, hi, 256, 0))
            for (std::size_t i = 0; i < n; ++i) {
                const double mu = problem.z_drift(i, {s.data(), n}, {s.data() + n, n});
                zmax[i] = std::max(zmax[i], gc.z_min[i] + problem.r() * problem.horizon() * mu);
            }
        for (std::size_t i = 0; i < n; ++i)
            zmax[i] += 3.0 * problem.r() * std::sqrt(problem.z_covariance()(i, i) * problem.horizon());
    }
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = {0.0, gc.w_max[i], gc.w_points};
        const bool flat = !(zmax[i] > gc.z_min[i]);
        z[i] = {gc.z_min[i], flat ? gc.z_min[i] : zmax[i], flat ? std::size_t{1} : gc.z_points};
    }
    std::size_t steps = gc.t_steps;
    if (steps == 0) {
        const Grid probe(w, z, 1, problem.horizon());
        const double bound = stability_bound(problem, probe, y_bounds(problem));
        steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(problem.horizon() / bound * (1.0 + 1e-9))));
    }
    return Grid(std::move(w), std::move(z), steps, problem.horizon());
}

json estimates_json(const PayoffEstimates& e)
{
    json agents = json::array();
    for (const auto& a : e.agents) agents.push_back({{"mean", a.mean}, {"se", a.se}});
    return {{"agents", agents}, {"principal", {{"mean", e.principal.mean}, {"se", e.principal.se}}}};
}

struct PolicySource {
    Policy policy;
    std::shared_ptr<const Solution> solution;  // set for field policies
};

PolicySource make_policy(const RunConfig& cfg, const fs::path& dir)
{
    NashConfig nash = cfg.nash;
    nash.certify = false;
    if (cfg.simulation.policy == "constant") {
        auto p = Policy::constant(cfg.simulation.incentives, cfg.simulation.forced_action);
        p.with_nash(nash);
        return {p, nullptr};
    }
    const auto cache = dir / "solution.cache";
    if (!fs::exists(cache))
        fail(ErrorKind::policy_lookup,
             "field policy needs a completed solve: " + cache.string() + " not found (run --mode solve first)");
    auto sol = std::make_shared<Solution>(load_solution(cache.string()));
    if (sol->value.first_computed != 0)
        fail(ErrorKind::policy_lookup, "solution cache " + cache.string() + " holds an unfinished solve");
    if (cfg.simulation.forced_action)
        fail(ErrorKind::semantic, "simulation.forced_action applies to constant policies only");
    auto p = Policy::field(std::shared_ptr<const PolicyField>(sol, &sol->policy));
    p.with_nash(nash);
    return {p, sol};
}

int run_equilibrium(const Problem& problem, const RunConfig& cfg, const fs::path& dir, std::ostream& out,
                    json& manifest)
{
    if (!cfg.incentives)
        fail(ErrorKind::semantic, "equilibrium mode needs equilibrium.y and equilibrium.c");
    const auto res = nash_solve(problem, *cfg.incentives, cfg.nash);
    json eq = json::array();
    for (std::size_t k = 0; k < res.equilibria.size(); ++k)
        eq.push_back({{"a", res.equilibria[k]},
                      {"residual", res.residuals[k]},
                      {"deviation_gains", res.deviation_gains[k]},
                      {"score", res.scores[k]}});
    const json j = {{"y", cfg.incentives->y}, {"c", cfg.incentives->c}, {"equilibria", eq},
                    {"selected", res.selected}, {"multiple", res.multiple}};
    open_artifact(dir / "equilibrium.json", manifest) << j.dump(2) << '\n';
    manifest["results"] = {{"selected", res.action()}, {"multiple", res.multiple}, {"count", res.equilibria.size()}};
    out << "equilibria: " << res.equilibria.size() << " (selected " << res.selected
        << ", multiple: " << (res.multiple ? "true" : "false") << ")\n";
    out << "a = " << tuple(res.action()) << '\n';
    return kExitOk;
}

int run_solve(const Problem& problem, const RunConfig& cfg, const RunOptions& opt, const fs::path& dir,
              std::ostream& out, json& manifest)
{
    if (!cfg.grid) fail(ErrorKind::semantic, "solve mode needs a grid section");
    const Grid grid = build_grid(problem, cfg);
    const auto cache = (dir / "solution.cache").string();
    SolveOptions so;
    so.threads = opt.threads;
    const std::size_t every = cfg.grid->checkpoint_every;
    if (cfg.write_cache && every > 0)
        so.on_slice = [&](std::size_t k, const Solution& s) {
            if (k % every == 0) save_solution(cache, s);
        };
    Solution sol;
    if (cfg.grid->resume && fs::exists(cache)) {
        auto partial = load_solution(cache);
        manifest["resumed_from_slice"] = partial.value.first_computed;
        sol = backward_solve(problem, grid, cfg.search, so, &partial);
    } else {
        sol = backward_solve(problem, grid, cfg.search, so);
    }
    if (cfg.write_cache) {
        save_solution(cache, sol);
        manifest["artifacts"].push_back("solution.cache");
    }
    {
        auto f = open_artifact(dir / "solution.csv", manifest);
        write_solution_csv(f, sol);
    }

    std::vector<double> state(cfg.simulation.w0);
    state.insert(state.end(), cfg.simulation.z0.begin(), cfg.simulation.z0.end());
    const double f0 = sol.value.interpolate(0, state);
    std::size_t multiple = 0;
    for (const auto& s : sol.policy.slices)
        for (auto m : s.multiple) multiple += m;
    json axes = json::array();
    for (const auto& ax : grid.axes()) axes.push_back({{"lo", ax.lo}, {"hi", ax.hi}, {"points", ax.points}});
    manifest["results"] = {{"F0", f0},           {"w0", cfg.simulation.w0}, {"z0", cfg.simulation.z0},
                           {"t_steps", grid.t_steps()}, {"dt", grid.dt()}, {"axes", axes},
                           {"nodes", grid.node_count()}, {"multiple_equilibrium_nodes", multiple}};
    out << "grid: " << grid.node_count() << " nodes x " << grid.t_steps() << " steps (dt " << grid.dt() << ")\n";
    out << "F(0, w0, z0) = " << fixed8(f0) << '\n';
    return kExitOk;
}

int run_simulate(const Problem& problem, const RunConfig& cfg, const RunOptions& opt, const fs::path& dir,
                 std::ostream& out, json& manifest)
{
    const auto src = make_policy(cfg, dir);
    SimulationSettings s;
    s.n_paths = cfg.simulation.n_paths;
    s.dt = cfg.simulation.dt;
    s.seed = cfg.simulation.seed;
    s.keep_paths = cfg.simulation.keep_paths;
    s.threads = opt.threads;
    const auto batch = simulate_batch(problem, src.policy, s, cfg.simulation.w0, cfg.simulation.z0);
    if (s.keep_paths) {
        auto f = open_artifact(dir / "batch.csv", manifest);
        write_batch_csv(f, batch);
    }
    const auto gaps = terminal_gaps(problem, batch);
    const json j = {{"estimates", estimates_json(batch.estimates)},
                    {"n_paths", batch.n_paths},
                    {"dt", batch.dt},
                    {"seed", batch.seed},
                    {"terminal_gaps", {{"mean", gaps.mean}, {"max", gaps.max}, {"z_noise", gaps.z_noise}}}};
    open_artifact(dir / "payoffs.json", manifest) << j.dump(2) << '\n';
    manifest["results"] = j;
    for (std::size_t i = 0; i < problem.n(); ++i)
        out << "U_" << i + 1 << " = " << fixed8(batch.estimates.agents[i].mean) << " (se "
            << fixed8(batch.estimates.agents[i].se) << ")\n";
    out << "U_P = " << fixed8(batch.estimates.principal.mean) << " (se " << fixed8(batch.estimates.principal.se)
        << ")\n";
    return kExitOk;
}

int run_audit_mode(const Problem& problem, const RunConfig& cfg, const RunOptions& opt, const fs::path& dir,
                   std::ostream& out, json& manifest)
{
    const auto src = make_policy(cfg, dir);
    AuditConfig ac = cfg.audit;
    ac.threads = opt.threads;
    const auto report = run_audit(problem, src.policy, cfg.simulation.w0, cfg.simulation.z0, ac,
                                  src.solution ? &src.solution->value : nullptr);
    open_artifact(dir / "audit.json", manifest) << audit_json(report) << '\n';
    {
        auto f = open_artifact(dir / "audit.csv", manifest);
        write_audit_csv(f, report);
    }
    manifest["results"] = json::parse(audit_json(report));
    out << "promise keeping: " << (report.promise.passed ? "pass" : "FAIL") << '\n';
    out << "incentive compatibility: " << (report.ic.passed ? "pass" : "FAIL") << '\n';
    out << "participation at t=0: " << (report.participation.ir_passed ? "pass" : "FAIL") << '\n';
    out << "participation along paths: " << (report.participation.instantaneous_passed ? "pass" : "FAIL") << '\n';
    if (report.drift) out << "value drift: " << (report.drift->passed ? "pass" : "FAIL") << '\n';
    out << "audit: " << (report.passed() ? "pass" : "FAIL") << '\n';
    return report.passed() ? kExitOk : kExitAuditFailed;
}

}  // namespace

Mode mode_from_string(std::string_view name)
{
    if (name == "equilibrium") return Mode::equilibrium;
    if (name == "solve") return Mode::solve;
    if (name == "simulate") return Mode::simulate;
    if (name == "audit") return Mode::audit;
    if (name.empty()) fail(ErrorKind::invalid_argument, "no mode given (use --mode or the config's \"mode\")");
    fail(ErrorKind::invalid_argument,
         "unknown mode '" + std::string(name) + "' (expected equilibrium, solve, simulate or audit)");
}

std::string_view to_string(Mode mode)
{
    switch (mode) {
    case Mode::equilibrium: return "equilibrium";
    case Mode::solve: return "solve";
    case Mode::simulate: return "simulate";
    case Mode::audit: return "audit";
    }
    return "?";
}

std::string resolve_out_dir(const RunConfig& config, const RunOptions& options)
{
    if (!options.out_dir.empty()) return options.out_dir;
    if (!config.out_dir.empty()) return config.out_dir;
    if (const char* env = std::getenv("MHC_OUT_DIR"); env && *env) return env;
    return "mhc_out";
}

std::string error_record(std::string_view kind, std::string_view message)
{
    return json{{"error", {{"kind", kind}, {"message", message}}}}.dump();
}

int run(const RunConfig& config, const RunOptions& options, std::ostream& out)
{
    const Mode mode = mode_from_string(options.mode.empty() ? config.mode : options.mode);
    RunConfig cfg = config;
    if (options.seed) cfg.simulation.seed = cfg.audit.seed = *options.seed;
    const fs::path dir = resolve_out_dir(cfg, options);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory " + dir.string() + ": " + ec.message());

    const auto start = std::chrono::steady_clock::now();
    json manifest;
    manifest["tool"] = "mhc";
    manifest["version"] = MHC_VERSION;
    manifest["mode"] = to_string(mode);
    manifest["seed"] = cfg.simulation.seed;
    manifest["threads"] = options.threads;
    manifest["config"] = json::parse(cfg.echo);
    manifest["config"]["simulation"]["seed"] = cfg.simulation.seed;
    manifest["artifacts"] = json::array();
    auto finish = [&](const std::string& status) {
        manifest["status"] = status;
        manifest["wall_time_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ofstream m(dir / "manifest.json", std::ios::trunc);
        m << manifest.dump(2) << '\n';
    };

    try {
        const Problem problem(cfg.problem);
        const auto report = validate_spec(problem, cfg.validation_samples, 0);
        json checks = json::array();
        for (const auto& c : report.checks)
            checks.push_back({{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"witness", c.witness},
                              {"detail", c.detail}});
        manifest["validation"] = {{"checks", checks}, {"jointly_concave", report.jointly_concave},
                                  {"samples", report.sample_count}};
        for (const auto& c : report.checks)
            if (!c.passed)
                fail(ErrorKind::semantic, "model check " + std::to_string(c.id) + " (" + c.name + ") failed: " + c.detail);

        int code = kExitOk;
        switch (mode) {
        case Mode::equilibrium: code = run_equilibrium(problem, cfg, dir, out, manifest); break;
        case Mode::solve: code = run_solve(problem, cfg, options, dir, out, manifest); break;
        case Mode::simulate: code = run_simulate(problem, cfg, options, dir, out, manifest); break;
        case Mode::audit: code = run_audit_mode(problem, cfg, options, dir, out, manifest); break;
        }
        finish(code == kExitOk ? "ok" : "audit_failed");
        return code;
    } catch (const Error& e) {
        manifest["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
        finish("error");
        throw;
    }
}

}  // namespace mhc
