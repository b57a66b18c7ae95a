#include "mhc/model.hpp"

#include "mhc/equilibrium.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "mhc/equilibrium.hpp"
#include "mhc/error.hpp"
#include "mhc/quasi_random.hpp"

namespace mhc {

namespace {

using ArgBuffer = std::array<double, 2 * kMaxAgents + 1>;

std::span<const double> pack(ArgBuffer& buf, std::span<const double> a, double c_i)
{
    std::copy(a.begin(), a.end(), buf.begin());
    buf[a.size()] = c_i;
    return {buf.data(), a.size() + 1};
}

std::span<const double> pack(ArgBuffer& buf, std::span<const double> a, std::span<const double> c)
{
    std::copy(a.begin(), a.end(), buf.begin());
    std::copy(c.begin(), c.end(), buf.begin() + static_cast<std::ptrdiff_t>(a.size()));
    return {buf.data(), a.size() + c.size()};
}

void check_dim(const CatalogEntry& e, std::size_t dim, const std::string& what)
{
    require(e.dim() == dim, ErrorKind::dimension_mismatch,
            what + " takes " + std::to_string(dim) + " arguments, entry has " + std::to_string(e.dim()));
}

}  // namespace

ZSpec default_z_spec(std::size_t n)
{
    ZSpec z;
    z.m_z = 1;
    z.sigma = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> w(2 * n, 0.0);
        w[i] = 1.0;
        z.mu.push_back(CatalogEntry::linear(0.0, std::move(w)));
    }
    return z;
}

Problem::Problem(ProblemSpec spec) : spec_(std::move(spec))
{
    const std::size_t n = spec_.n;
    require(n >= 1, ErrorKind::dimension_mismatch, "need at least one agent");
    require(n <= kMaxAgents, ErrorKind::dimension_mismatch,
            "at most " + std::to_string(kMaxAgents) + " agents are supported");
    require(spec_.m >= 1, ErrorKind::dimension_mismatch, "Brownian dimension m must be >= 1");
    require(spec_.r > 0.0 && std::isfinite(spec_.r), ErrorKind::invalid_argument, "r must be positive");
    require(spec_.horizon > 0.0 && std::isfinite(spec_.horizon), ErrorKind::invalid_argument,
            "T must be positive");
    require(spec_.agents.size() == n, ErrorKind::dimension_mismatch, "agent list length must equal n");
    require(spec_.sigma.rows() == n && spec_.sigma.cols() == spec_.m, ErrorKind::dimension_mismatch,
            "sigma must be n x m");
    require(spec_.z.m_z >= 1, ErrorKind::dimension_mismatch, "m_Z must be >= 1");
    require(spec_.z.mu.size() == n, ErrorKind::dimension_mismatch, "need one mu_Z entry per agent");
    require(spec_.z.sigma.rows() == n && spec_.z.sigma.cols() == spec_.z.m_z,
            ErrorKind::dimension_mismatch, "sigma_Z must be n x m_Z");

    std::vector<double> a_lo(n, 0.0), a_hi(n), c_lo(n, 0.0), c_hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& ag = spec_.agents[i];
        require(std::isfinite(ag.a_max) && ag.a_max > 0.0, ErrorKind::domain_empty,
                "agent " + std::to_string(i) + ": action domain [0, a_max] needs a_max > 0");
        require(std::isfinite(ag.c_max) && ag.c_max >= 0.0, ErrorKind::domain_empty,
                "agent " + std::to_string(i) + ": compensation domain [0, c_max] needs c_max >= 0");
        a_hi[i] = ag.a_max;
        c_hi[i] = ag.c_max;
    }
    std::vector<double> ac_lo = a_lo, ac_hi = a_hi;
    ac_lo.insert(ac_lo.end(), c_lo.begin(), c_lo.end());
    ac_hi.insert(ac_hi.end(), c_hi.begin(), c_hi.end());

    for (std::size_t i = 0; i < n; ++i) {
        auto& ag = spec_.agents[i];
        const std::string who = "agent " + std::to_string(i);
        check_dim(ag.utility, n + 1, who + " utility");
        check_dim(ag.drift, n, who + " drift");
        check_dim(ag.terminal, 1, who + " terminal payoff");
        std::vector<double> u_lo = a_lo, u_hi = a_hi;
        u_lo.push_back(0.0);
        u_hi.push_back(ag.c_max);
        ag.utility = ag.utility.with_domain(u_lo, u_hi);
        ag.drift = ag.drift.with_domain(a_lo, a_hi);
        check_dim(spec_.z.mu[i], 2 * n, who + " mu_Z");
        spec_.z.mu[i] = spec_.z.mu[i].with_domain(ac_lo, ac_hi);
    }
    check_dim(spec_.principal.utility, 2 * n, "principal utility");
    spec_.principal.utility = spec_.principal.utility.with_domain(ac_lo, ac_hi);

    output_cov_ = spec_.sigma.gram();
    z_cov_ = spec_.z.sigma.gram();
}

double Problem::utility(std::size_t i, std::span<const double> a, double c_i) const
{
    ArgBuffer buf;
    return spec_.agents[i].utility.value(pack(buf, a, c_i));
}

double Problem::utility_da(std::size_t i, std::span<const double> a, double c_i, std::size_t k) const
{
    ArgBuffer buf;
    return spec_.agents[i].utility.partial(pack(buf, a, c_i), k);
}

double Problem::utility_daa(std::size_t i, std::span<const double> a, double c_i, std::size_t k,
                            std::size_t l) const
{
    ArgBuffer buf;
    return spec_.agents[i].utility.second_partial(pack(buf, a, c_i), k, l);
}

double Problem::utility_dc(std::size_t i, std::span<const double> a, double c_i) const
{
    ArgBuffer buf;
    return spec_.agents[i].utility.partial(pack(buf, a, c_i), a.size());
}

double Problem::drift(std::size_t i, std::span<const double> a) const
{
    return spec_.agents[i].drift.value(a);
}

double Problem::drift_da(std::size_t i, std::span<const double> a, std::size_t k) const
{
    return spec_.agents[i].drift.partial(a, k);
}

double Problem::drift_daa(std::size_t i, std::span<const double> a, std::size_t k, std::size_t l) const
{
    return spec_.agents[i].drift.second_partial(a, k, l);
}

double Problem::terminal(std::size_t i, double z_i) const
{
    return spec_.agents[i].terminal.value(std::span<const double>(&z_i, 1));
}

double Problem::principal_utility(std::span<const double> a, std::span<const double> c) const
{
    ArgBuffer buf;
    return spec_.principal.utility.value(pack(buf, a, c));
}

double Problem::z_drift(std::size_t i, std::span<const double> a, std::span<const double> c) const
{
    ArgBuffer buf;
    return spec_.z.mu[i].value(pack(buf, a, c));
}

// ---------------------------------------------------------------------------

bool ValidationReport::all_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const AssumptionCheck& ValidationReport::check(int id) const
{
    for (const auto& c : checks)
        if (c.id == id) return c;
    fail(ErrorKind::invalid_argument, "no assumption check with id " + std::to_string(id));
}

namespace {

struct CheckRecorder {
    AssumptionCheck check;

    void violate(std::span<const double> point, std::string detail)
    {
        if (!check.passed) return;
        check.passed = false;
        check.witness.assign(point.begin(), point.end());
        check.detail = std::move(detail);
    }
};

std::string agent_tag(std::size_t i) { return "agent " + std::to_string(i) + ": "; }

}  // namespace

ValidationReport validate_spec(const Problem& problem, std::size_t samples, std::uint64_t seed)
{
    const std::size_t n = problem.n();
    std::vector<double> lo(2 * n, 0.0), hi(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        hi[i] = problem.a_max(i);
        hi[n + i] = problem.c_max(i);
    }
    const auto points = box_samples(lo, hi, samples, seed);

    CheckRecorder a1{{1, "u_i increasing in c_i and concave in own action", true, {}, {}}};
    CheckRecorder a2{{2, "f_i nonnegative, increasing and concave in own action", true, {}, {}}};
    CheckRecorder a3{{3, "own-action drift derivative >= 1e-10 up to a_max", true, {}, {}}};
    CheckRecorder a4{{4, "participation set nonempty (witness a = 0)", true, {}, {}}};
    CheckRecorder a5{{5, "compact action domain with finite utility", true, {}, {}}};
    CheckRecorder a6{{6, "u_i(a_-i, 0, c_i) >= 0", true, {}, {}}};
    CheckRecorder a7{{7, "g_i nondecreasing in own action", true, {}, {}}};

    ValidationReport report;
    report.sample_count = points.size();

    constexpr std::size_t kMonotoneGrid = 33;
    // g along the own-action line through (a_-i, c_i)
    const auto monotone_line = [&](std::size_t i, std::span<const double> a, double c_i) {
        double prev = -std::numeric_limits<double>::infinity();
        std::vector<double> ax(a.begin(), a.end());
        for (std::size_t s = 0; s < kMonotoneGrid; ++s) {
            ax[i] = problem.a_max(i) * static_cast<double>(s) / (kMonotoneGrid - 1);
            const double dfx = problem.drift_da(i, ax, i);
            if (std::abs(dfx) < kDerivativeFloor) break;
            const double g = -problem.utility_da(i, ax, c_i, i) / dfx;
            if (g < prev - kValidationTol * (1.0 + std::abs(prev))) {
                std::vector<double> w = ax;
                w.push_back(c_i);
                a7.violate(w, agent_tag(i) + "g decreases along own action");
                return;
            }
            prev = g;
        }
    };
    bool a4_witnessed = false;
    std::vector<double> a(n), c(n);
    for (const auto& p : points) {
        std::copy(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(n), a.begin());
        std::copy(p.begin() + static_cast<std::ptrdiff_t>(n), p.end(), c.begin());
        try {
            for (std::size_t i = 0; i < n; ++i) {
                const std::string tag = agent_tag(i);
                const double u = problem.utility(i, a, c[i]);
                if (!std::isfinite(u)) a5.violate(p, tag + "utility not finite");
                if (problem.utility_dc(i, a, c[i]) < -kValidationTol)
                    a1.violate(p, tag + "u decreasing in compensation");
                if (problem.utility_daa(i, a, c[i], i, i) > kValidationTol)
                    a1.violate(p, tag + "u convex in own action");

                const double f = problem.drift(i, a);
                const double df = problem.drift_da(i, a, i);
                if (f < -kValidationTol) a2.violate(p, tag + "drift negative");
                if (df < -kValidationTol) a2.violate(p, tag + "drift decreasing in own action");
                if (problem.drift_daa(i, a, i, i) > kValidationTol)
                    a2.violate(p, tag + "drift convex in own action");
                if (df < kDerivativeFloor) a3.violate(p, tag + "own-action drift derivative below floor");

                std::vector<double> a0 = a;
                a0[i] = 0.0;
                if (problem.utility(i, a0, c[i]) < -kValidationTol)
                    a6.violate(p, tag + "zero action gives negative utility");

                Matrix h(n, n);
                for (std::size_t k = 0; k < n; ++k)
                    for (std::size_t l = k; l < n; ++l)
                        h(k, l) = h(l, k) = problem.utility_daa(i, a, c[i], k, l);
                if (report.jointly_concave && symmetric_eigenvalues(h).back() > kValidationTol) {
                    report.jointly_concave = false;
                    report.joint_concavity_witness = p;
                }

                monotone_line(i, a, c[i]);
            }
            if (!a4_witnessed) {
                std::vector<double> zero(n, 0.0);
                bool ok = true;
                for (std::size_t i = 0; i < n && ok; ++i)
                    ok = problem.utility(i, zero, c[i]) >= -kValidationTol;
                if (ok) {
                    a4_witnessed = true;
                    a4.check.witness = zero;
                    a4.check.witness.insert(a4.check.witness.end(), c.begin(), c.end());
                }
            }
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::out_of_domain) throw;
            a1.violate(p, std::string("model function not evaluable: ") + e.what());
        }
    }
    if (!a4_witnessed) {
        a4.check.passed = false;
        a4.check.detail = "no sampled compensation makes every u_i(0, c_i) >= 0";
    }
    // g lines through a 5-level lattice over (a_-i, c_i) as well: the extremes
    // of the other agents' actions are where monotonicity tends to break
    CheckRecorder a8{{8, "incentive interval [beta_i, gamma_i] nonempty", true, {}, {}}};
    for (std::size_t i = 0; i < n; ++i) {
        constexpr std::size_t kLevels = 5;
        std::size_t total = 1;
        for (std::size_t d = 0; d < n; ++d) total *= kLevels;
        std::vector<double> a(n);
        for (std::size_t idx = 0; idx < total && a7.check.passed; ++idx) {
            std::size_t rem = idx;
            double c_i = 0.0;
            for (std::size_t d = 0; d < n; ++d) {
                const double s = static_cast<double>(rem % kLevels) / (kLevels - 1);
                rem /= kLevels;
                if (d == i)
                    c_i = s * problem.c_max(i);
                else
                    a[d] = s * problem.a_max(d);
            }
            try {
                monotone_line(i, a, c_i);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::out_of_domain) throw;
                a1.violate(a, std::string("model function not evaluable: ") + e.what());
            }
        }
        if (!a7.check.passed || !a3.check.passed) continue;
        try {
            y_bounds(problem, i);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::empty_interval) throw;
            a8.violate({}, e.what());
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(problem.a_max(i))) a5.violate({}, agent_tag(i) + "unbounded action domain");

    report.checks = {a1.check, a2.check, a3.check, a4.check, a5.check, a6.check, a7.check, a8.check};
    return report;
}

ValidationReport validate_spec(const ProblemSpec& spec, std::size_t samples, std::uint64_t seed)
{
    return validate_spec(Problem(spec), samples, seed);
}

}  // namespace mhc
