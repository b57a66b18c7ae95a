#include "mhc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mhc/error.hpp"

namespace mhc {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

// A JSON object being consumed: remembers which keys were read so leftovers
// can be rejected, and writes every resolved value into the echo.
class Section {
public:
    Section(const json& j, std::string path, json& echo) : j_(j), path_(std::move(path)), echo_(echo)
    {
        if (!j_.is_object()) fail(ErrorKind::semantic, label() + " must be an object");
        if (!echo_.is_object()) echo_ = json::object();
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key)
    {
        seen_.insert(key);
        echo_[key] = j_.at(key);
        return j_.at(key);
    }

    double number(const std::string& key, std::optional<double> def = {})
    {
        seen_.insert(key);
        if (!j_.contains(key)) {
            if (!def) missing(key);
            echo_[key] = *def;
            return *def;
        }
        const auto& v = j_.at(key);
        if (!v.is_number()) fail(ErrorKind::semantic, join(path_, key) + " must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(ErrorKind::semantic, join(path_, key) + " must be finite");
        echo_[key] = d;
        return d;
    }

    std::size_t count(const std::string& key, std::optional<std::size_t> def = {})
    {
        seen_.insert(key);
        if (!j_.contains(key)) {
            if (!def) missing(key);
            echo_[key] = *def;
            return *def;
        }
        const auto& v = j_.at(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
            fail(ErrorKind::semantic, join(path_, key) + " must be a non-negative integer");
        const auto n = v.get<std::uint64_t>();
        echo_[key] = n;
        return static_cast<std::size_t>(n);
    }

    bool flag(const std::string& key, bool def)
    {
        seen_.insert(key);
        if (!j_.contains(key)) {
            echo_[key] = def;
            return def;
        }
        const auto& v = j_.at(key);
        if (!v.is_boolean()) fail(ErrorKind::semantic, join(path_, key) + " must be true or false");
        echo_[key] = v.get<bool>();
        return v.get<bool>();
    }

    std::string text(const std::string& key, std::optional<std::string> def = {})
    {
        seen_.insert(key);
        if (!j_.contains(key)) {
            if (!def) missing(key);
            echo_[key] = *def;
            return *def;
        }
        const auto& v = j_.at(key);
        if (!v.is_string()) fail(ErrorKind::semantic, join(path_, key) + " must be a string");
        echo_[key] = v.get<std::string>();
        return v.get<std::string>();
    }

    // A vector of `size` numbers; a scalar is broadcast.
    std::vector<double> vector(const std::string& key, std::size_t size, std::optional<double> fill = {})
    {
        seen_.insert(key);
        std::vector<double> out;
        if (!j_.contains(key)) {
            if (!fill) missing(key);
            out.assign(size, *fill);
        } else {
            const auto& v = j_.at(key);
            if (v.is_number()) {
                out.assign(size, v.get<double>());
            } else if (v.is_array()) {
                if (v.size() != size)
                    fail(ErrorKind::semantic, join(path_, key) + " must have " + std::to_string(size) + " entries");
                for (const auto& e : v) {
                    if (!e.is_number()) fail(ErrorKind::semantic, join(path_, key) + " must contain numbers");
                    out.push_back(e.get<double>());
                }
            } else {
                fail(ErrorKind::semantic, join(path_, key) + " must be a number or an array of numbers");
            }
            for (double d : out)
                if (!std::isfinite(d)) fail(ErrorKind::semantic, join(path_, key) + " must be finite");
        }
        echo_[key] = out;
        return out;
    }

    // rows x cols matrix; a scalar s means s on the diagonal (square only).
    Matrix matrix(const std::string& key, std::size_t rows, std::size_t cols, std::optional<double> diag = {})
    {
        seen_.insert(key);
        Matrix m(rows, cols);
        const std::string name = join(path_, key);
        if (!j_.contains(key)) {
            if (!diag) missing(key);
            for (std::size_t i = 0; i < std::min(rows, cols); ++i) m(i, i) = *diag;
        } else {
            const auto& v = j_.at(key);
            if (v.is_number()) {
                if (rows != cols) fail(ErrorKind::semantic, name + " must be a " + dims(rows, cols) + " matrix");
                for (std::size_t i = 0; i < rows; ++i) m(i, i) = v.get<double>();
            } else {
                if (!v.is_array() || v.size() != rows)
                    fail(ErrorKind::semantic, name + " must be a " + dims(rows, cols) + " matrix");
                for (std::size_t i = 0; i < rows; ++i) {
                    if (!v[i].is_array() || v[i].size() != cols)
                        fail(ErrorKind::semantic, name + " must be a " + dims(rows, cols) + " matrix");
                    for (std::size_t k = 0; k < cols; ++k) {
                        if (!v[i][k].is_number()) fail(ErrorKind::semantic, name + " must contain numbers");
                        m(i, k) = v[i][k].get<double>();
                    }
                }
            }
        }
        json rows_json = json::array();
        for (std::size_t i = 0; i < rows; ++i) {
            json row = json::array();
            for (std::size_t k = 0; k < cols; ++k) row.push_back(m(i, k));
            rows_json.push_back(row);
        }
        echo_[key] = rows_json;
        return m;
    }

    Section child(const std::string& key)
    {
        seen_.insert(key);
        return Section(j_.at(key), join(path_, key), echo_[key]);
    }

    json& echo() { return echo_; }
    const std::string& path() const { return path_; }

    void finish() const
    {
        for (const auto& item : j_.items())
            if (!seen_.count(item.key()))
                fail(ErrorKind::unknown_key, "unknown key '" + join(path_, item.key()) + "'");
    }

private:
    [[noreturn]] void missing(const std::string& key) const
    {
        fail(ErrorKind::semantic, "missing required key '" + join(path_, key) + "'");
    }
    static std::string dims(std::size_t r, std::size_t c) { return std::to_string(r) + "x" + std::to_string(c); }
    std::string label() const { return path_.empty() ? "configuration" : path_; }

    const json& j_;
    std::string path_;
    json& echo_;
    std::set<std::string> seen_;
};

void positive(double v, const std::string& name)
{
    if (!(v > 0.0)) fail(ErrorKind::semantic, name + " must be positive");
}

CatalogEntry parse_entry(Section s, std::size_t dim)
{
    const std::string family = s.text("family");
    const std::string where = s.path();
    auto weights = [&] { return s.vector("w", dim, 0.0); };
    auto hessian = [&] { return s.matrix("H", dim, dim, 0.0); };
    auto coord = [&] {
        const auto k = s.count("coord");
        if (k >= dim) fail(ErrorKind::semantic, where + ".coord must be below " + std::to_string(dim));
        return k;
    };
    CatalogEntry e;
    try {
        if (family == "constant") {
            e = CatalogEntry::constant(dim, s.number("value"));
        } else if (family == "linear") {
            const double b = s.number("b", 0.0);
            e = CatalogEntry::linear(b, weights());
        } else if (family == "linquad") {
            const double b = s.number("b", 0.0);
            auto w = weights();
            e = CatalogEntry::linquad(b, std::move(w), hessian());
        } else if (family == "exp_cara") {
            const auto k = coord();
            const double rho = s.number("rho");
            const double scale = s.number("scale", 1.0);
            const double b = s.number("b", 0.0);
            auto w = weights();
            e = CatalogEntry::exp_cara(k, rho, scale, b, std::move(w), hessian());
        } else if (family == "power") {
            const auto k = coord();
            const double exponent = s.number("exponent");
            const double scale = s.number("scale", 1.0);
            const double shift = s.number("shift", 0.0);
            const double b = s.number("b", 0.0);
            auto w = weights();
            e = CatalogEntry::power(k, exponent, scale, shift, b, std::move(w), hessian());
        } else if (family == "polynomial" || family == "custom-polynomial") {
            const double b = s.number("b", 0.0);
            std::vector<Monomial> terms;
            const auto& list = s.raw("terms");
            if (!list.is_array()) fail(ErrorKind::semantic, where + ".terms must be an array");
            for (std::size_t t = 0; t < list.size(); ++t) {
                json echo;
                Section term(list[t], where + ".terms[" + std::to_string(t) + "]", echo);
                Monomial m;
                m.coef = term.number("coef");
                const auto& p = term.raw("powers");
                if (!p.is_array() || p.size() != dim)
                    fail(ErrorKind::semantic, term.path() + ".powers must have " + std::to_string(dim) + " entries");
                for (const auto& v : p) {
                    if (!v.is_number_unsigned())
                        fail(ErrorKind::semantic, term.path() + ".powers must be non-negative integers");
                    m.powers.push_back(v.get<unsigned>());
                }
                term.finish();
                terms.push_back(std::move(m));
            }
            e = CatalogEntry::polynomial(dim, b, std::move(terms));
        } else {
            fail(ErrorKind::semantic, where + ".family '" + family +
                                          "' is not one of constant, linear, linquad, exp_cara, power, polynomial");
        }
    } catch (const Error& err) {
        if (err.kind() == ErrorKind::semantic || err.kind() == ErrorKind::unknown_key) throw;
        fail(ErrorKind::semantic, where + ": " + err.what());
    }
    s.finish();
    return e;
}

// u_i = c_i - kappa/2 a_i^2 - gamma a_i sum_{j != i} a_j, f_i = a_i,
// u_P = sum_i (a_i - eta/2 a_i^2 - c_i), Phi_i = phi1 z + phi2/2 z^2
ProblemSpec linquad_preset(Section& s, std::size_t n)
{
    ProblemSpec p;
    p.n = n;
    p.m = n;
    const double kappa = s.number("kappa", 1.0);
    const double gamma = s.number("gamma", 0.0);
    const double eta = s.number("eta", 0.0);
    const double phi1 = s.number("phi1", 0.0);
    const double phi2 = s.number("phi2", 0.0);
    const double a_max = s.number("a_max", 1.0);
    const double c_max = s.number("c_max", 1.0);
    p.sigma = s.matrix("sigma", n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        AgentSpec ag;
        ag.a_max = a_max;
        ag.c_max = c_max;
        std::vector<double> w(n + 1, 0.0);
        w[n] = 1.0;
        Matrix h(n + 1, n + 1);
        h(i, i) = -kappa;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) h(i, j) = h(j, i) = -gamma;
        ag.utility = CatalogEntry::linquad(0.0, std::move(w), std::move(h));
        std::vector<double> f(n, 0.0);
        f[i] = 1.0;
        ag.drift = CatalogEntry::linear(0.0, std::move(f));
        ag.terminal = CatalogEntry::linquad(0.0, {phi1}, Matrix{{phi2}});
        p.agents.push_back(std::move(ag));
    }
    std::vector<double> wp(2 * n, 0.0);
    Matrix hp(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        wp[i] = 1.0;
        wp[n + i] = -1.0;
        hp(i, i) = -eta;
    }
    p.principal.utility = CatalogEntry::linquad(0.0, std::move(wp), std::move(hp));
    return p;
}

ProblemSpec parse_problem(Section s, std::size_t& validation_samples)
{
    const std::size_t n = s.count("n");
    if (n < 1 || n > kMaxAgents)
        fail(ErrorKind::semantic, "n must be between 1 and " + std::to_string(kMaxAgents));
    const std::string preset = s.text("preset", "none");
    ProblemSpec p;
    if (preset == "linquad") {
        p = linquad_preset(s, n);
    } else if (preset == "none") {
        p.n = n;
        p.m = s.count("m", n);
        if (p.m < 1) fail(ErrorKind::semantic, "m must be at least 1");
        p.sigma = s.matrix("sigma", n, p.m, 0.0);
        const auto& agents = s.raw("agents");
        if (!agents.is_array() || agents.size() != n)
            fail(ErrorKind::semantic, "problem.agents must be an array of n = " + std::to_string(n) + " entries");
        auto& echo_agents = s.echo()["agents"];
        for (std::size_t i = 0; i < n; ++i) {
            Section a(agents[i], "problem.agents[" + std::to_string(i) + "]", echo_agents[i]);
            AgentSpec ag;
            ag.a_max = a.number("a_max", 1.0);
            ag.c_max = a.number("c_max", 1.0);
            ag.utility = parse_entry(a.child("utility"), n + 1);
            ag.drift = parse_entry(a.child("drift"), n);
            if (a.has("terminal"))
                ag.terminal = parse_entry(a.child("terminal"), 1);
            else
                ag.terminal = CatalogEntry::constant(1, 0.0);
            a.finish();
            p.agents.push_back(std::move(ag));
        }
        Section pr = s.child("principal");
        p.principal.utility = parse_entry(pr.child("utility"), 2 * n);
        pr.finish();
    } else {
        fail(ErrorKind::semantic, "problem.preset must be \"linquad\" or \"none\"");
    }
    p.r = s.number("r");
    positive(p.r, "r");
    p.horizon = s.number("horizon", 1.0);
    positive(p.horizon, "horizon");
    p.z = default_z_spec(n);
    if (s.has("z")) {
        Section z = s.child("z");
        p.z.m_z = z.count("m_z", n);
        if (p.z.m_z < 1) fail(ErrorKind::semantic, "m_z must be at least 1");
        p.z.sigma = z.matrix("sigma", n, p.z.m_z, 0.0);
        if (z.has("mu")) {
            const auto& mu = z.raw("mu");
            if (!mu.is_array() || mu.size() != n)
                fail(ErrorKind::semantic, "problem.z.mu must be an array of n entries");
            p.z.mu.clear();
            auto& echo_mu = z.echo()["mu"];
            for (std::size_t i = 0; i < n; ++i)
                p.z.mu.push_back(parse_entry(Section(mu[i], "problem.z.mu[" + std::to_string(i) + "]", echo_mu[i]), 2 * n));
        }
        z.finish();
    }
    validation_samples = s.count("validation_samples", 256);
    s.finish();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(p.agents[i].a_max > 0.0)) fail(ErrorKind::semantic, "a_max must be positive");
        if (!(p.agents[i].c_max >= 0.0)) fail(ErrorKind::semantic, "c_max must be non-negative");
    }
    return p;
}

void parse_nash(Section s, NashConfig& c, std::optional<IncentiveState>& inc, std::size_t n)
{
    c.damping = s.number("damping", c.damping);
    if (!(c.damping > 0.0 && c.damping <= 1.0)) fail(ErrorKind::semantic, "damping must lie in (0, 1]");
    c.fp_tol = s.number("fp_tol", c.fp_tol);
    positive(c.fp_tol, "fp_tol");
    c.dev_tol = s.number("dev_tol", c.dev_tol);
    positive(c.dev_tol, "dev_tol");
    c.dedup_tol = s.number("dedup_tol", c.dedup_tol);
    positive(c.dedup_tol, "dedup_tol");
    c.starts = s.count("starts", c.starts);
    if (c.starts < 1) fail(ErrorKind::semantic, "starts must be at least 1");
    c.max_iter = s.count("max_iter", c.max_iter);
    if (c.max_iter < 1) fail(ErrorKind::semantic, "max_iter must be at least 1");
    c.verify_grid = s.count("verify_grid", c.verify_grid);
    if (c.verify_grid < 2) fail(ErrorKind::semantic, "verify_grid must be at least 2");
    if (s.has("y") || s.has("c")) inc = IncentiveState{s.vector("y", n), s.vector("c", n)};
    s.finish();
}

GridConfig parse_grid(Section s, std::size_t n)
{
    if (n > 2)
        fail(ErrorKind::semantic,
             "grid: HJB solves are capped at n <= 2 agents (desk-scale limit, state dimension 2n <= 4); "
             "equilibrium mode runs without a grid section");
    GridConfig g;
    g.w_max = s.vector("w_max", n, 1.0);
    for (double v : g.w_max) positive(v, "grid.w_max");
    g.w_points = s.count("w_points", g.w_points);
    g.z_min = s.vector("z_min", n, 0.0);
    if (s.has("z_max")) {
        g.z_max = s.vector("z_max", n);
        for (std::size_t i = 0; i < n; ++i)
            if (!(g.z_max[i] >= g.z_min[i])) fail(ErrorKind::semantic, "grid.z_max must not be below grid.z_min");
    }
    g.z_points = s.count("z_points", g.z_points);
    for (auto pts : {g.w_points, g.z_points})
        if (pts != 1 && pts < 3) fail(ErrorKind::semantic, "grid point counts must be 1 or at least 3");
    g.t_steps = s.count("t_steps", 0);
    g.checkpoint_every = s.count("checkpoint_every", 0);
    g.resume = s.flag("resume", false);
    s.finish();
    return g;
}

void parse_search(Section s, SearchConfig& c)
{
    c.coarse_points = s.count("coarse_points", c.coarse_points);
    if (c.coarse_points < 2) fail(ErrorKind::semantic, "coarse_points must be at least 2");
    c.refine_starts = s.count("refine_starts", c.refine_starts);
    c.simplex_tol = s.number("simplex_tol", c.simplex_tol);
    positive(c.simplex_tol, "simplex_tol");
    c.max_evals = s.count("max_evals", c.max_evals);
    c.tie_tol = s.number("tie_tol", c.tie_tol);
    if (!(c.tie_tol >= 0.0)) fail(ErrorKind::semantic, "tie_tol must be non-negative");
    s.finish();
}

void parse_simulation(Section s, SimulationConfig& c, std::size_t n, double horizon, bool has_grid)
{
    c.n_paths = s.count("n_paths", c.n_paths);
    if (c.n_paths < 1) fail(ErrorKind::semantic, "n_paths must be at least 1");
    c.dt = s.number("dt", c.dt);
    if (!(c.dt > 0.0 && c.dt <= horizon)) fail(ErrorKind::semantic, "dt must satisfy 0 < dt <= horizon");
    c.seed = s.count("seed", 0);
    c.w0 = s.vector("w0", n, 0.0);
    c.z0 = s.vector("z0", n, 0.0);
    c.policy = s.text("policy", has_grid ? "field" : "constant");
    if (c.policy != "constant" && c.policy != "field")
        fail(ErrorKind::semantic, "simulation.policy must be \"constant\" or \"field\"");
    if (c.policy == "constant") {
        c.incentives.y = s.vector("y", n, 0.0);
        c.incentives.c = s.vector("c", n, 0.0);
    }
    if (s.has("forced_action")) c.forced_action = s.vector("forced_action", n);
    c.keep_paths = s.flag("keep_paths", true);
    s.finish();
}

void parse_audit(Section s, AuditConfig& c)
{
    c.deviations = s.count("deviations", c.deviations);
    c.ic_tol = s.number("ic_tol", c.ic_tol);
    c.ic_allowance = s.number("ic_allowance", c.ic_allowance);
    c.ir_tol = s.number("ir_tol", c.ir_tol);
    c.instantaneous_tol = s.number("instantaneous_tol", c.instantaneous_tol);
    c.drift_allowance = s.number("drift_allowance", c.drift_allowance);
    for (double v : {c.ic_tol, c.ic_allowance, c.ir_tol, c.instantaneous_tol, c.drift_allowance})
        if (!(v >= 0.0)) fail(ErrorKind::semantic, "audit tolerances must be non-negative");
    s.finish();
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

RunConfig parse_config(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        std::string msg = e.what();
        const auto pos = msg.find("parse error");
        if (pos != std::string::npos) msg = msg.substr(pos);
        fail(ErrorKind::parse, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
    }
    RunConfig rc;
    json echo = json::object();
    Section top(doc, "", echo);
    if (top.has("mode")) rc.mode = top.text("mode");
    rc.problem = parse_problem(top.child("problem"), rc.validation_samples);
    const std::size_t n = rc.problem.n;

    json empty = json::object();
    auto section = [&](const char* key) {
        if (top.has(key)) return top.child(key);
        echo[key] = json::object();
        return Section(empty, key, echo[key]);
    };
    parse_nash(section("equilibrium"), rc.nash, rc.incentives, n);
    const bool has_grid = top.has("grid");
    if (has_grid) rc.grid = parse_grid(top.child("grid"), n);
    rc.search.nash = rc.nash;
    parse_search(section("search"), rc.search);
    parse_simulation(section("simulation"), rc.simulation, n, rc.problem.horizon, has_grid);
    if (rc.simulation.policy == "field" && !has_grid)
        fail(ErrorKind::semantic, "simulation.policy \"field\" needs a grid section");
    parse_audit(section("audit"), rc.audit);
    rc.audit.n_paths = rc.simulation.n_paths;
    rc.audit.dt = rc.simulation.dt;
    rc.audit.seed = rc.simulation.seed;
    {
        Section out = section("outputs");
        rc.out_dir = out.text("dir", "");
        rc.write_cache = out.flag("cache", true);
        out.finish();
    }
    top.finish();
    rc.echo = echo.dump(2);
    return rc;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot read configuration " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace mhc
