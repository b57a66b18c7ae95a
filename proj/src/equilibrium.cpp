#include "mhc/equilibrium.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "mhc/error.hpp"
#include "mhc/quasi_random.hpp"

namespace mhc {

namespace {

using ActionBuffer = std::array<double, kMaxAgents>;

std::span<double> copy_actions(ActionBuffer& buf, std::span<const double> a)
{
    std::copy(a.begin(), a.end(), buf.begin());
    return {buf.data(), a.size()};
}

double g_at(const Problem& p, std::size_t i, std::span<const double> a, double c_i)
{
    const double df = p.drift_da(i, a, i);
    if (!(std::abs(df) >= kDerivativeFloor))
        fail(ErrorKind::derivative_floor,
             "agent " + std::to_string(i) + ": |df/da_i| = " + std::to_string(df) +
                 " is below the 1e-10 floor");
    return -p.utility_da(i, a, c_i, i) / df;
}

double g_slope(const Problem& p, std::size_t i, std::span<const double> a, double c_i)
{
    const double df = p.drift_da(i, a, i);
    const double d2f = p.drift_daa(i, a, i, i);
    const double du = p.utility_da(i, a, c_i, i);
    const double d2u = p.utility_daa(i, a, c_i, i, i);
    return (-d2u * df + du * d2f) / (df * df);
}

double golden_max(const std::function<double(double)>& f, double lo, double hi, double& best_x)
{
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 90 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = f(x1);
        }
    }
    best_x = f1 >= f2 ? x1 : x2;
    return std::max(f1, f2);
}

void check_incentives(const Problem& p, const IncentiveState& inc)
{
    require(inc.y.size() == p.n() && inc.c.size() == p.n(), ErrorKind::dimension_mismatch,
            "incentive state needs y and c of length n");
}

}  // namespace

double g_eval(const Problem& problem, std::size_t i, std::span<const double> a, double c_i, double x)
{
    require(a.size() == problem.n(), ErrorKind::dimension_mismatch, "action vector must have length n");
    ActionBuffer buf;
    auto ax = copy_actions(buf, a);
    ax[i] = x;
    return g_at(problem, i, ax, c_i);
}

YInterval y_bounds(const Problem& problem, std::size_t i, std::size_t samples)
{
    const std::size_t n = problem.n();
    // sample (a_-i, c_i): coordinates 0..n-2 are the other agents, n-1 is c_i
    std::vector<double> lo(n, 0.0), hi(n);
    for (std::size_t j = 0, k = 0; j < n; ++j)
        if (j != i) hi[k++] = problem.a_max(j);
    hi[n - 1] = problem.c_max(i);
    auto points = box_samples(lo, hi, samples, 0);
    if (n <= 4) {
        constexpr std::size_t kLevels = 5;
        std::size_t total = 1;
        for (std::size_t d = 0; d < n; ++d) total *= kLevels;
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::vector<double> p(n);
            std::size_t rem = idx;
            for (std::size_t d = 0; d < n; ++d) {
                p[d] = lo[d] + (hi[d] - lo[d]) * static_cast<double>(rem % kLevels) / (kLevels - 1);
                rem /= kLevels;
            }
            points.push_back(std::move(p));
        }
    }

    YInterval out{0.0, std::numeric_limits<double>::infinity()};
    std::vector<double> a(n);
    for (const auto& p : points) {
        for (std::size_t j = 0, k = 0; j < n; ++j)
            if (j != i) a[j] = p[k++];
        const double c_i = p[n - 1];
        a[i] = 0.0;
        out.beta = std::max(out.beta, g_at(problem, i, a, c_i));
        a[i] = problem.a_max(i);
        out.gamma = std::min(out.gamma, g_at(problem, i, a, c_i));
    }
    if (!(out.beta < out.gamma))
        fail(ErrorKind::empty_interval,
             "agent " + std::to_string(i) + ": incentive interval [" + std::to_string(out.beta) + ", " +
                 std::to_string(out.gamma) + "] is empty; the action domain is too small");
    return out;
}

YBounds y_bounds(const Problem& problem)
{
    YBounds b;
    for (std::size_t i = 0; i < problem.n(); ++i) {
        const auto iv = y_bounds(problem, i);
        b.beta.push_back(iv.beta);
        b.gamma.push_back(iv.gamma);
    }
    return b;
}

double agent_objective(const Problem& problem, std::size_t i, std::span<const double> a, double c_i,
                       double y_i, double x)
{
    ActionBuffer buf;
    auto ax = copy_actions(buf, a);
    ax[i] = x;
    return y_i * problem.drift(i, ax) + problem.utility(i, ax, c_i);
}

double best_response(const Problem& problem, std::size_t i, std::span<const double> a, double c_i,
                     double y_i)
{
    require(a.size() == problem.n(), ErrorKind::dimension_mismatch, "action vector must have length n");
    ActionBuffer buf;
    auto ax = copy_actions(buf, a);
    const double a_max = problem.a_max(i);
    auto g = [&](double x) {
        ax[i] = x;
        return g_at(problem, i, ax, c_i);
    };
    auto non_monotone = [&](double x0, double x1) {
        fail(ErrorKind::non_monotone, "agent " + std::to_string(i) + ": g decreases between x = " +
                                          std::to_string(x0) + " and x = " + std::to_string(x1));
    };

    double lo = 0.0, hi = a_max;
    double glo = g(lo), ghi = g(hi);
    const double slack = 1e-12 * (1.0 + std::abs(glo) + std::abs(ghi));
    if (ghi < glo - slack) non_monotone(lo, hi);
    if (y_i <= glo) return 0.0;
    if (y_i >= ghi) return a_max;

    const double x_tol = 1e-15 * (1.0 + a_max);
    double x = lo + (y_i - glo) / (ghi - glo) * (hi - lo);
    for (int it = 0; it < 200; ++it) {
        const double gx = g(x);
        if (gx < glo - slack || gx > ghi + slack) non_monotone(lo, hi);
        const double d = gx - y_i;
        if (d == 0.0) return x;
        if (d < 0.0) {
            lo = x;
            glo = gx;
        } else {
            hi = x;
            ghi = gx;
        }
        if (hi - lo <= x_tol) break;
        ax[i] = x;
        const double slope = g_slope(problem, i, ax, c_i);
        double next = slope > 0.0 && std::isfinite(slope) ? x - d / slope : lo - 1.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= x_tol) return next;
        x = next;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> verify_nash(const Problem& problem, std::span<const double> a,
                                const IncentiveState& inc, std::size_t grid_points)
{
    check_incentives(problem, inc);
    require(a.size() == problem.n(), ErrorKind::dimension_mismatch, "action vector must have length n");
    grid_points = std::max<std::size_t>(grid_points, 3);
    std::vector<double> gains(problem.n());
    for (std::size_t i = 0; i < problem.n(); ++i) {
        auto phi = [&](double x) { return agent_objective(problem, i, a, inc.c[i], inc.y[i], x); };
        const double a_max = problem.a_max(i);
        const double at_a = phi(std::clamp(a[i], 0.0, a_max));
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_k = 0;
        for (std::size_t k = 0; k < grid_points; ++k) {
            const double v = phi(a_max * static_cast<double>(k) / (grid_points - 1));
            if (v > best) {
                best = v;
                best_k = k;
            }
        }
        const double h = a_max / (grid_points - 1);
        const double lo = std::max(0.0, h * (static_cast<double>(best_k) - 1.0));
        const double hi = std::min(a_max, h * (static_cast<double>(best_k) + 1.0));
        double x_star = 0.0;
        best = std::max(best, golden_max(phi, lo, hi, x_star));
        gains[i] = std::max(best, at_a) - at_a;
    }
    return gains;
}

EquilibriumResult nash_solve(const Problem& problem, const IncentiveState& inc, const NashConfig& cfg,
                             const EquilibriumScore& score)
{
    check_incentives(problem, inc);
    require(cfg.damping > 0.0 && cfg.damping <= 1.0, ErrorKind::invalid_argument,
            "damping must lie in (0, 1]");
    require(cfg.starts >= 1, ErrorKind::invalid_argument, "need at least one start");
    const std::size_t n = problem.n();

    std::vector<std::vector<double>> found;
    std::vector<double> found_res;
    double best_residual = std::numeric_limits<double>::infinity();

    std::vector<double> a(n), br(n);
    if (n == 1) {
        // Gamma does not depend on a: the single-agent fixed point is the best response.
        a[0] = best_response(problem, 0, a, inc.c[0], inc.y[0]);
        found.push_back(a);
        found_res.push_back(0.0);
    } else {
        HaltonSequence starts(n);
        for (std::size_t s = 0; s < cfg.starts; ++s) {
            starts.point(s + 1, a);
            for (std::size_t i = 0; i < n; ++i) a[i] *= problem.a_max(i);
            for (std::size_t it = 0; it < cfg.max_iter; ++it) {
                double res = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    br[i] = best_response(problem, i, a, inc.c[i], inc.y[i]);
                    res = std::max(res, std::abs(br[i] - a[i]));
                }
                best_residual = std::min(best_residual, res);
                if (res <= cfg.fp_tol) {
                    // one undamped step: exact when Gamma is locally constant
                    double res2 = 0.0;
                    for (std::size_t i = 0; i < n; ++i)
                        res2 = std::max(res2, std::abs(best_response(problem, i, br, inc.c[i], inc.y[i]) - br[i]));
                    if (res2 <= res) {
                        found.push_back(br);
                        found_res.push_back(res2);
                    } else {
                        found.push_back(a);
                        found_res.push_back(res);
                    }
                    break;
                }
                for (std::size_t i = 0; i < n; ++i)
                    a[i] = (1.0 - cfg.damping) * a[i] + cfg.damping * br[i];
            }
        }
    }
    if (found.empty())
        fail(ErrorKind::no_convergence, "best-response iteration did not converge from any of " +
                                            std::to_string(cfg.starts) + " starts; best residual " +
                                            std::to_string(best_residual));

    EquilibriumResult out;
    double worst_gain = 0.0;
    for (std::size_t k = 0; k < found.size(); ++k) {
        bool duplicate = false;
        for (const auto& e : out.equilibria) {
            double dist = 0.0;
            for (std::size_t i = 0; i < n; ++i) dist = std::max(dist, std::abs(e[i] - found[k][i]));
            if (dist < cfg.dedup_tol) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) continue;
        std::vector<double> gains;
        if (cfg.certify) {
            gains = verify_nash(problem, found[k], inc, cfg.verify_grid);
            const double g = *std::max_element(gains.begin(), gains.end());
            if (g > cfg.dev_tol) {
                worst_gain = std::max(worst_gain, g);
                continue;
            }
        }
        out.equilibria.push_back(found[k]);
        out.residuals.push_back(found_res[k]);
        out.deviation_gains.push_back(std::move(gains));
    }
    if (out.equilibria.empty())
        fail(ErrorKind::certification_failed,
             "no fixed point passed the deviation audit; largest gain " + std::to_string(worst_gain));

    out.scores.reserve(out.equilibria.size());
    for (const auto& e : out.equilibria)
        out.scores.push_back(score ? score(e) : problem.principal_utility(e, inc.c));
    out.selected = static_cast<std::size_t>(
        std::max_element(out.scores.begin(), out.scores.end()) - out.scores.begin());
    out.multiple = out.equilibria.size() >= 2;
    return out;
}

}  // namespace mhc
