#include "mhc/hjb.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "mhc/error.hpp"
#include "mhc/quasi_random.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace mhc {

namespace {

constexpr std::size_t kMaxDims = Grid::kMaxStateDims;

// Everything H^y F needs beyond the grid: per-agent y, u_i(a, c_i), mu_Zi(a, c).
struct OperatorInputs {
    std::span<const double> y;
    std::span<const double> u;
    std::span<const double> mu_z;
};

double generator(const Problem& p, const Grid& grid, std::span<const double> F, std::size_t node,
                 const OperatorInputs& in)
{
    const std::size_t n = grid.n_agents();
    const std::size_t dims = grid.dims();
    std::array<std::size_t, kMaxDims> idx{};
    grid.unravel(node, {idx.data(), dims});
    const double r = p.r();
    const double f0 = F[node];

    // offsets used for central / one-sided differences along each axis
    std::array<int, kMaxDims> up{}, down{};
    std::array<bool, kMaxDims> live{};
    for (std::size_t d = 0; d < dims; ++d) {
        const auto pts = grid.axis(d).points;
        live[d] = pts > 1;
        up[d] = idx[d] + 1 < pts ? 1 : 0;
        down[d] = idx[d] > 0 ? -1 : 0;
    }
    auto shifted = [&](std::size_t d, int off) {
        return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) +
                                        off * static_cast<std::ptrdiff_t>(grid.stride(d)));
    };

    double total = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
        if (!live[d]) continue;
        const double h = grid.axis(d).step();
        const std::size_t agent = d % n;
        const bool w_axis = d < n;
        const double state = grid.axis(d).at(idx[d]);
        const double drift = w_axis ? r * (state - in.u[agent]) : r * in.mu_z[agent];

        if (drift != 0.0) {
            double deriv;
            const bool forward = drift > 0.0 ? up[d] != 0 : down[d] == 0;
            if (forward)
                deriv = (F[shifted(d, 1)] - f0) / h;
            else
                deriv = (f0 - F[shifted(d, -1)]) / h;
            total += drift * deriv;
        }

        const double diff = w_axis ? r * r * in.y[agent] * in.y[agent] * p.output_covariance()(agent, agent)
                                   : r * r * p.z_covariance()(agent, agent);
        if (diff != 0.0) {
            // one-sided three-point stencil at the ends of the axis
            int centre = 0;
            if (up[d] == 0) centre = -1;
            if (down[d] == 0) centre = 1;
            const std::size_t mid = shifted(d, centre);
            const double second = (F[shifted(d, centre + 1)] - 2.0 * F[mid] + F[shifted(d, centre - 1)]) / (h * h);
            total += 0.5 * diff * second;
        }
    }

    // cross terms stay within the w block and within the z block
    for (std::size_t d = 0; d < dims; ++d) {
        for (std::size_t e = d + 1; e < dims; ++e) {
            if (!live[d] || !live[e] || (d < n) != (e < n)) continue;
            const std::size_t i = d % n, j = e % n;
            const double coef = d < n ? r * r * in.y[i] * in.y[j] * p.output_covariance()(i, j)
                                      : r * r * p.z_covariance()(i, j);
            if (coef == 0.0) continue;
            auto at = [&](int od, int oe) {
                return F[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) +
                                                  od * static_cast<std::ptrdiff_t>(grid.stride(d)) +
                                                  oe * static_cast<std::ptrdiff_t>(grid.stride(e)))];
            };
            const double span_d = (up[d] - down[d]) * grid.axis(d).step();
            const double span_e = (up[e] - down[e]) * grid.axis(e).step();
            const double cross =
                (at(up[d], up[e]) - at(up[d], down[e]) - at(down[d], up[e]) + at(down[d], down[e])) /
                (span_d * span_e);
            total += coef * cross;
        }
    }
    return total;
}

struct ControlPoint {
    std::vector<double> x;  // (y_1..y_n, c_1..c_n)
    double value = -std::numeric_limits<double>::infinity();
};

bool lex_less(const std::vector<double>& a, const std::vector<double>& b)
{
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::string node_label(const Grid& grid, std::size_t node, double t)
{
    const auto x = grid.coordinates(node);
    const std::size_t n = grid.n_agents();
    std::ostringstream os;
    os.precision(10);
    os << "t=" << t;
    for (std::size_t d = 0; d < x.size(); ++d)
        os << ", " << (d < n ? "w" : "z") << d % n + 1 << '=' << x[d];
    return os.str();
}

}  // namespace

std::vector<double> terminal_condition(const Problem& problem, const Grid& grid)
{
    require(grid.n_agents() == problem.n(), ErrorKind::dimension_mismatch,
            "grid dimension does not match the number of agents");
    const std::size_t n = problem.n();
    std::vector<double> slice(grid.node_count());
    std::vector<double> x(grid.dims());
    for (std::size_t node = 0; node < slice.size(); ++node) {
        grid.coordinates(node, x);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += problem.terminal(i, x[n + i]);
        slice[node] = 0.0 - problem.r() * sum;  // +0 rather than -0 when Phi vanishes
    }
    return slice;
}

double apply_operator(const Problem& problem, const Grid& grid, std::span<const double> slice,
                      std::size_t node, const IncentiveState& inc, std::span<const double> a)
{
    const std::size_t n = problem.n();
    require(grid.n_agents() == n && inc.y.size() == n && inc.c.size() == n && a.size() == n,
            ErrorKind::dimension_mismatch, "apply_operator: inconsistent dimensions");
    require(slice.size() == grid.node_count() && node < grid.node_count(),
            ErrorKind::dimension_mismatch, "apply_operator: slice or node out of range");
    std::array<double, kMaxAgents> u{}, mu{};
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = problem.utility(i, a, inc.c[i]);
        mu[i] = problem.z_drift(i, a, inc.c);
    }
    return generator(problem, grid, slice, node, {inc.y, {u.data(), n}, {mu.data(), n}});
}

struct ControlSearch::Impl {
    const Problem* problem = nullptr;
    SearchConfig cfg;
    YBounds bounds;
    std::vector<double> lo, hi;  // box over (y, c)

    struct Coarse {
        std::vector<double> x;
        std::vector<double> a;
        std::vector<double> u;
        std::vector<double> mu_z;
        double reward = 0.0;  // r u_P(a, c)
    };
    std::vector<Coarse> coarse;
    std::optional<Error> coarse_error;

    NashConfig fast_nash() const
    {
        NashConfig nc = cfg.nash;
        nc.certify = false;
        return nc;
    }

    // a(y, c), u_i, mu_Zi and r u_P for an arbitrary control
    void evaluate(std::span<const double> x, Coarse& out) const
    {
        const std::size_t n = problem->n();
        IncentiveState inc{{x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n)},
                           {x.begin() + static_cast<std::ptrdiff_t>(n), x.end()}};
        const auto eq = nash_solve(*problem, inc, fast_nash());
        out.x.assign(x.begin(), x.end());
        out.a = eq.action();
        out.u.resize(n);
        out.mu_z.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            out.u[i] = problem->utility(i, out.a, inc.c[i]);
            out.mu_z[i] = problem->z_drift(i, out.a, inc.c);
        }
        out.reward = problem->r() * problem->principal_utility(out.a, inc.c);
    }

    double value(const Grid& grid, std::span<const double> F, std::size_t node, const Coarse& e) const
    {
        const std::size_t n = problem->n();
        return e.reward + generator(*problem, grid, F, node,
                                    {{e.x.data(), n}, e.u, e.mu_z});
    }
};

ControlSearch::ControlSearch(const Problem& problem, SearchConfig cfg) : impl_(std::make_unique<Impl>())
{
    require(cfg.coarse_points >= 2, ErrorKind::invalid_argument, "search needs >= 2 coarse points");
    auto& s = *impl_;
    s.problem = &problem;
    s.cfg = cfg;
    s.bounds = y_bounds(problem);
    const std::size_t n = problem.n();
    s.lo.resize(2 * n);
    s.hi.resize(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        s.lo[i] = s.bounds.beta[i];
        s.hi[i] = s.bounds.gamma[i];
        s.lo[n + i] = 0.0;
        s.hi[n + i] = problem.c_max(i);
    }
    const std::size_t dims = 2 * n;
    std::vector<std::size_t> counts(dims);
    std::size_t total = 1;
    for (std::size_t d = 0; d < dims; ++d) {
        counts[d] = s.hi[d] > s.lo[d] ? cfg.coarse_points : 1;
        total *= counts[d];
    }
    s.coarse.resize(total);
    std::vector<double> x(dims);
    try {
        for (std::size_t k = 0; k < total; ++k) {
            std::size_t rem = k;
            for (std::size_t d = dims; d-- > 0;) {
                const std::size_t j = rem % counts[d];
                rem /= counts[d];
                x[d] = counts[d] == 1 ? s.lo[d]
                                      : s.lo[d] + (s.hi[d] - s.lo[d]) * static_cast<double>(j) /
                                                      static_cast<double>(counts[d] - 1);
            }
            s.evaluate(x, s.coarse[k]);
        }
    } catch (const Error& e) {
        s.coarse_error = e;
    }
}

ControlSearch::~ControlSearch() = default;
ControlSearch::ControlSearch(ControlSearch&&) noexcept = default;
ControlSearch& ControlSearch::operator=(ControlSearch&&) noexcept = default;

const YBounds& ControlSearch::bounds() const { return impl_->bounds; }
const SearchConfig& ControlSearch::config() const { return impl_->cfg; }

double ControlSearch::objective(const Grid& grid, std::span<const double> slice, std::size_t node,
                                const IncentiveState& inc, std::span<const double> a) const
{
    const auto& p = *impl_->problem;
    return p.r() * p.principal_utility(a, inc.c) + apply_operator(p, grid, slice, node, inc, a);
}

NodeControl ControlSearch::maximize(const Grid& grid, std::span<const double> slice, std::size_t node) const
{
    const auto& s = *impl_;
    const auto& p = *s.problem;
    if (s.coarse_error) throw *s.coarse_error;
    const std::size_t n = p.n();
    const std::size_t dims = 2 * n;

    std::vector<ControlPoint> candidates(s.coarse.size());
    for (std::size_t k = 0; k < s.coarse.size(); ++k) {
        candidates[k].x = s.coarse[k].x;
        candidates[k].value = s.value(grid, slice, node, s.coarse[k]);
    }
    auto better = [&](const ControlPoint& a, const ControlPoint& b) {
        if (std::abs(a.value - b.value) > s.cfg.tie_tol) return a.value > b.value;
        return lex_less(a.x, b.x);
    };
    const std::size_t starts = std::min(s.cfg.refine_starts, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(starts),
                      candidates.end(), better);
    candidates.resize(starts);

    std::vector<std::size_t> free;
    for (std::size_t d = 0; d < dims; ++d)
        if (s.hi[d] > s.lo[d]) free.push_back(d);

    Impl::Coarse scratch;
    auto eval = [&](std::vector<double>& x) {
        for (std::size_t d = 0; d < dims; ++d) x[d] = std::clamp(x[d], s.lo[d], s.hi[d]);
        s.evaluate(x, scratch);
        return s.value(grid, slice, node, scratch);
    };

    // Nelder-Mead on the free coordinates, maximising G
    const std::size_t k = free.size();
    if (k > 0) {
        for (std::size_t st = 0; st < starts; ++st) {
            std::vector<ControlPoint> simplex(k + 1);
            simplex[0] = candidates[st];
            std::size_t evals = 0;
            for (std::size_t j = 0; j < k; ++j) {
                const std::size_t d = free[j];
                const double step = (s.hi[d] - s.lo[d]) / static_cast<double>(s.cfg.coarse_points - 1);
                auto x = simplex[0].x;
                x[d] += x[d] + step <= s.hi[d] ? step : -step;
                simplex[j + 1].value = eval(x);
                simplex[j + 1].x = x;
                ++evals;
            }
            auto order = [&] {
                std::sort(simplex.begin(), simplex.end(), better);
            };
            order();
            while (evals < s.cfg.max_evals) {
                double diameter = 0.0;
                for (std::size_t v = 1; v <= k; ++v)
                    for (std::size_t d : free)
                        diameter = std::max(diameter, std::abs(simplex[v].x[d] - simplex[0].x[d]) /
                                                          (s.hi[d] - s.lo[d]));
                const double spread = simplex[0].value - simplex[k].value;
                if (diameter <= s.cfg.simplex_tol ||
                    spread <= 1e-15 + 1e-13 * std::abs(simplex[0].value))
                    break;
                std::vector<double> centroid(dims, 0.0);
                for (std::size_t v = 0; v < k; ++v)
                    for (std::size_t d = 0; d < dims; ++d) centroid[d] += simplex[v].x[d] / static_cast<double>(k);
                auto along = [&](double t) {
                    std::vector<double> x(dims);
                    for (std::size_t d = 0; d < dims; ++d)
                        x[d] = centroid[d] + t * (simplex[k].x[d] - centroid[d]);
                    return x;
                };
                auto xr = along(-1.0);
                const double fr = eval(xr);
                ++evals;
                if (fr > simplex[0].value) {
                    auto xe = along(-2.0);
                    const double fe = eval(xe);
                    ++evals;
                    simplex[k] = fe > fr ? ControlPoint{xe, fe} : ControlPoint{xr, fr};
                } else if (fr > simplex[k - 1].value) {
                    simplex[k] = {xr, fr};
                } else {
                    const bool outside = fr > simplex[k].value;
                    auto xc = along(outside ? -0.5 : 0.5);
                    const double fc = eval(xc);
                    ++evals;
                    if (fc > (outside ? fr : simplex[k].value)) {
                        simplex[k] = {xc, fc};
                    } else {
                        for (std::size_t v = 1; v <= k; ++v) {
                            for (std::size_t d = 0; d < dims; ++d)
                                simplex[v].x[d] = simplex[0].x[d] + 0.5 * (simplex[v].x[d] - simplex[0].x[d]);
                            simplex[v].value = eval(simplex[v].x);
                            ++evals;
                        }
                    }
                }
                order();
            }
            candidates.push_back(simplex[0]);
        }
    }

    // best value; among near-ties the lexicographically smallest control
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) best = std::max(best, c.value);
    const ControlPoint* pick = nullptr;
    for (const auto& c : candidates)
        if (c.value >= best - s.cfg.tie_tol && (!pick || lex_less(c.x, pick->x))) pick = &c;

    NodeControl out;
    out.y.assign(pick->x.begin(), pick->x.begin() + static_cast<std::ptrdiff_t>(n));
    out.c.assign(pick->x.begin() + static_cast<std::ptrdiff_t>(n), pick->x.end());
    IncentiveState inc{out.y, out.c};
    const auto eq = nash_solve(p, inc, s.cfg.nash);
    out.a = eq.action();
    out.multiple = eq.multiple;
    out.value = objective(grid, slice, node, inc, out.a);
    return out;
}

NodeControl inner_max(const Problem& problem, const Grid& grid, std::span<const double> slice,
                      std::size_t node, const SearchConfig& cfg)
{
    require(grid.n_agents() == problem.n(), ErrorKind::dimension_mismatch,
            "grid dimension does not match the number of agents");
    return ControlSearch(problem, cfg).maximize(grid, slice, node);
}

double stability_bound(const Problem& problem, const Grid& grid, const YBounds& bounds)
{
    const std::size_t n = problem.n();
    const double r = problem.r();
    // u_i and mu_Zi ranges over A x C
    std::vector<double> lo(2 * n, 0.0), hi(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        hi[i] = problem.a_max(i);
        hi[n + i] = problem.c_max(i);
    }
    const auto samples = box_samples(lo, hi, 256, 0);
    std::vector<double> u_min(n, std::numeric_limits<double>::infinity()), u_max(n, -u_min[0]);
    std::vector<double> mu_max(n, 0.0);
    for (const auto& s : samples) {
        std::span<const double> a(s.data(), n), c(s.data() + n, n);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = problem.utility(i, a, c[i]);
            u_min[i] = std::min(u_min[i], u);
            u_max[i] = std::max(u_max[i], u);
            mu_max[i] = std::max(mu_max[i], std::abs(problem.z_drift(i, a, c)));
        }
    }
    double sum = r;
    for (std::size_t d = 0; d < grid.dims(); ++d) {
        const auto& ax = grid.axis(d);
        if (ax.points == 1) continue;
        const double h = ax.step();
        const std::size_t i = d % n;
        if (d < n) {
            const double mu = std::max(std::abs(ax.hi - u_min[i]), std::abs(ax.lo - u_max[i]));
            const double y = std::max(std::abs(bounds.beta[i]), std::abs(bounds.gamma[i]));
            sum += r * mu / h + r * r * y * y * problem.output_covariance()(i, i) / (h * h);
        } else {
            sum += r * mu_max[i] / h + r * r * problem.z_covariance()(i, i) / (h * h);
        }
    }
    return 1.0 / sum;
}

Solution backward_solve(const Problem& problem, const Grid& grid, const SearchConfig& cfg,
                        const SolveOptions& options, Solution* resume)
{
    require(grid.n_agents() == problem.n(), ErrorKind::dimension_mismatch,
            "grid dimension does not match the number of agents");
    ControlSearch search(problem, cfg);
    const double dt = grid.dt();
    if (options.check_stability) {
        const double bound = stability_bound(problem, grid, search.bounds());
        if (dt > bound * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "time step " << dt << " exceeds the explicit stability bound " << bound
               << " (need at least " << static_cast<std::size_t>(std::ceil(grid.horizon() / bound))
               << " steps)";
            fail(ErrorKind::stability, os.str());
        }
    }

    const std::size_t steps = grid.t_steps();
    const std::size_t nodes = grid.node_count();
    const std::size_t n = problem.n();
    Solution sol;
    if (resume) {
        const auto& g = resume->value.grid;
        bool same = g.t_steps() == steps && g.dims() == grid.dims() && g.horizon() == grid.horizon() &&
                    resume->value.slices.size() == steps + 1 && resume->policy.slices.size() == steps;
        for (std::size_t d = 0; same && d < grid.dims(); ++d)
            same = g.axis(d).lo == grid.axis(d).lo && g.axis(d).hi == grid.axis(d).hi &&
                   g.axis(d).points == grid.axis(d).points;
        require(same, ErrorKind::invalid_argument, "resume state was computed on a different grid");
        sol = std::move(*resume);
    } else {
        sol.value.grid = grid;
        sol.value.slices.assign(steps + 1, std::vector<double>(nodes, 0.0));
        sol.value.slices[steps] = terminal_condition(problem, grid);
        sol.value.first_computed = steps;
        sol.policy.grid = grid;
        sol.policy.slices.resize(steps);
        for (auto& ps : sol.policy.slices) {
            ps.y.assign(nodes * n, 0.0);
            ps.c.assign(nodes * n, 0.0);
            ps.a.assign(nodes * n, 0.0);
            ps.value.assign(nodes, 0.0);
            ps.multiple.assign(nodes, 0);
        }
    }

    const double r = problem.r();
    std::vector<std::string> failures(nodes);
    for (std::size_t k = sol.value.first_computed; k-- > 0;) {
        const auto& prev = sol.value.slices[k + 1];
        auto& next = sol.value.slices[k];
        auto& pol = sol.policy.slices[k];
        const double t = grid.time(k + 1);
        bool any_failed = false;
#if defined(_OPENMP)
        const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads) reduction(|| : any_failed)
#endif
        for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(nodes); ++j) {
            const auto node = static_cast<std::size_t>(j);
            try {
                const auto ctrl = search.maximize(grid, prev, node);
                next[node] = prev[node] + dt * (ctrl.value - r * prev[node]);
                if (!std::isfinite(next[node]))
                    fail(ErrorKind::nonfinite_state, "value became non-finite");
                std::copy(ctrl.y.begin(), ctrl.y.end(), pol.y.begin() + static_cast<std::ptrdiff_t>(node * n));
                std::copy(ctrl.c.begin(), ctrl.c.end(), pol.c.begin() + static_cast<std::ptrdiff_t>(node * n));
                std::copy(ctrl.a.begin(), ctrl.a.end(), pol.a.begin() + static_cast<std::ptrdiff_t>(node * n));
                pol.value[node] = ctrl.value;
                pol.multiple[node] = ctrl.multiple ? 1 : 0;
            } catch (const std::exception& e) {
                failures[node] = e.what();
                any_failed = true;
            }
        }
        if (any_failed) {
            for (std::size_t node = 0; node < nodes; ++node)
                if (!failures[node].empty())
                    fail(ErrorKind::node_failure,
                         "node failure at " + node_label(grid, node, t) + ": " + failures[node]);
        }
        sol.value.first_computed = k;
        if (options.on_slice) options.on_slice(k, sol);
    }
    return sol;
}

double principal_value_drift(const Problem& problem, const ValueField& value, const DriftPoint& point)
{
    const auto& grid = value.grid;
    const std::size_t n = problem.n();
    require(point.w.size() == n && point.z.size() == n && point.a.size() == n,
            ErrorKind::dimension_mismatch, "drift point needs w, z, a of length n");
    const std::size_t steps = grid.t_steps();
    const double dt = grid.dt();
    std::size_t k = point.t > 0.0 ? static_cast<std::size_t>(std::floor(point.t / dt + 1e-9)) : 0;
    k = std::min(k, steps - 1);
    require(value.first_computed <= k, ErrorKind::invalid_argument, "value field not solved at this time");

    std::array<double, kMaxDims> state{};
    std::copy(point.w.begin(), point.w.end(), state.begin());
    std::copy(point.z.begin(), point.z.end(), state.begin() + static_cast<std::ptrdiff_t>(n));
    const auto corners = grid.locate({state.data(), grid.dims()});
    const auto& F0 = value.slices[k];
    const auto& F1 = value.slices[k + 1];
    const double r = problem.r();
    const double reward = r * problem.principal_utility(point.a, point.inc.c);
    double drift = 0.0;
    for (std::size_t v = 0; v < corners.count; ++v) {
        const std::size_t node = corners.nodes[v];
        const double d = (F1[node] - F0[node]) / dt + reward +
                         apply_operator(problem, grid, F1, node, point.inc, point.a) - r * F1[node];
        drift += corners.weights[v] * d;
    }
    return std::exp(-r * point.t) * drift;
}

std::vector<double> principal_value_drift(const Problem& problem, const ValueField& value,
                                          std::span<const DriftPoint> path)
{
    std::vector<double> out;
    out.reserve(path.size());
    for (const auto& p : path) out.push_back(principal_value_drift(problem, value, p));
    return out;
}

}  // namespace mhc
