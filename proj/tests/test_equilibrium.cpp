#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "mhc/equilibrium.hpp"
#include "mhc/error.hpp"

using namespace mhc;
using mhc::testing::Linquad;
using mhc::testing::linquad_problem;

namespace {

Linquad decoupled(std::size_t n, double kappa = 1.0)
{
    Linquad o;
    o.n = n;
    o.gamma = 0.0;
    o.kappa = kappa;
    return o;
}

}  // namespace

TEST_CASE("g_eval on the linquad family")
{
    const auto p = linquad_problem({});
    const std::vector<double> a{0.0, 0.5};
    CHECK(g_eval(p, 0, a, 0.3, 0.3) == doctest::Approx(0.4).epsilon(1e-14));
    const auto q = linquad_problem(decoupled(2));
    CHECK(g_eval(q, 0, a, 0.0, 0.7) == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(g_eval(p, 1, std::vector<double>{0.0, 0.0}, 0.9, 0.0) == 0.0);
}

TEST_CASE("g_eval enforces the drift derivative floor")
{
    auto spec = mhc::testing::linquad_spec({});
    spec.agents[0].drift = CatalogEntry::linear(0.0, {1e-12, 0.0});
    const Problem p(spec);
    try {
        g_eval(p, 0, std::vector<double>{0.2, 0.2}, 0.0, 0.1);
        FAIL("expected derivative floor error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::derivative_floor);
    }
}

TEST_CASE("incentive bounds")
{
    auto b = y_bounds(linquad_problem(decoupled(1)), 0);
    CHECK(b.beta == 0.0);
    CHECK(b.gamma == doctest::Approx(1.0));
    b = y_bounds(linquad_problem({}), 0);
    CHECK(b.beta == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(b.gamma == doctest::Approx(1.0).epsilon(1e-14));
    b = y_bounds(linquad_problem(decoupled(1, 2.0)), 0);
    CHECK(b.beta == 0.0);
    CHECK(b.gamma == doctest::Approx(2.0));

    Linquad tight;
    tight.gamma = 2.0;  // beta = 2 > gamma = 1
    try {
        y_bounds(linquad_problem(tight), 0);
        FAIL("expected empty interval");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::empty_interval);
    }
}

TEST_CASE("best responses")
{
    const auto p = linquad_problem({});
    CHECK(best_response(p, 0, std::vector<double>{0.0, 0.4}, 0.5, 0.5) ==
          doctest::Approx(0.42).epsilon(1e-14));
    const auto q = linquad_problem(decoupled(2));
    CHECK(best_response(q, 0, std::vector<double>{0.0, 0.0}, 0.0, 0.0) == 0.0);
    CHECK(best_response(q, 0, std::vector<double>{0.0, 0.0}, 0.0, 5.0) == 1.0);
}

TEST_CASE("best response maximises the agent objective on nonlinear families")
{
    Linquad o;
    o.n = 2;
    auto spec = mhc::testing::linquad_spec(o);
    spec.agents[0].drift = CatalogEntry::exp_cara(0, 1.5, 1.0, 0.0, {0.0, 0.1});
    spec.agents[0].utility = CatalogEntry::exp_cara(2, 2.0, 1.0, 0.0, {0.0, 0.0, 0.0},
                                                    Matrix{{-1.5, -0.1, 0.0}, {-0.1, 0.0, 0.0}, {0.0, 0.0, 0.0}});
    const Problem p(spec);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        const std::vector<double> a{0.0, u(rng)};
        const double c = u(rng), y = 1.5 * u(rng);
        const double x = best_response(p, 0, a, c, y);
        const double at = agent_objective(p, 0, a, c, y, x);
        for (int s = 0; s <= 400; ++s)
            CHECK(agent_objective(p, 0, a, c, y, s / 400.0) <= at + 1e-12);
    }
}

TEST_CASE("non-monotone g is reported")
{
    Linquad o;
    o.n = 1;
    auto spec = mhc::testing::linquad_spec(o);
    spec.agents[0].utility = CatalogEntry::linquad(0.0, {0.5, 1.0}, Matrix{{1.0, 0.0}, {0.0, 0.0}});
    const Problem p(spec);
    // g(x) = -(0.5 + x), strictly decreasing
    try {
        best_response(p, 0, std::vector<double>{0.0}, 0.0, -1.0);
        FAIL("expected non-monotone error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::non_monotone);
    }
}

TEST_CASE("nash_solve matches the linear-system solution")
{
    const auto p = linquad_problem({});
    const IncentiveState inc{{0.5, 0.5}, {0.3, 0.7}};
    const auto res = nash_solve(p, inc);
    REQUIRE(res.equilibria.size() == 1);
    CHECK_FALSE(res.multiple);
    // a_i = y_i - 0.2 a_j  =>  a = 0.5 / 1.2
    CHECK(std::abs(res.action()[0] - 0.5 / 1.2) <= 1e-9);
    CHECK(res.action()[1] == doctest::Approx(0.41666667).epsilon(1e-8));
    CHECK(res.residuals[0] <= 1e-10);
    for (double g : res.deviation_gains[0]) CHECK(g <= 1e-10);

    const auto q = linquad_problem(decoupled(2));
    const auto d = nash_solve(q, IncentiveState{{0.3, 0.9}, {0.0, 0.0}});
    CHECK(d.action()[0] == 0.3);
    CHECK(d.action()[1] == 0.9);
}

TEST_CASE("single agent reduces to the best response")
{
    Linquad o;
    o.n = 1;
    o.kappa = 1.7;
    const auto p = linquad_problem(o);
    const auto res = nash_solve(p, IncentiveState{{0.8}, {0.2}});
    CHECK(res.action()[0] == best_response(p, 0, std::vector<double>{0.0}, 0.2, 0.8));
}

TEST_CASE("deviation audit")
{
    const auto q = linquad_problem(decoupled(2));
    auto gains = verify_nash(q, std::vector<double>{0.0, 0.0}, IncentiveState{{0.5, 0.5}, {0.0, 0.0}});
    CHECK(gains[0] == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(gains[1] == doctest::Approx(0.125).epsilon(1e-12));
    gains = verify_nash(q, std::vector<double>{0.0, 0.0}, IncentiveState{{0.0, 0.0}, {0.0, 0.0}});
    CHECK(gains[0] == 0.0);
    CHECK(gains[1] == 0.0);
}

TEST_CASE("no convergence is reported with the best residual")
{
    const auto p = linquad_problem({});
    NashConfig cfg;
    cfg.max_iter = 3;
    try {
        nash_solve(p, IncentiveState{{0.5, 0.5}, {0.0, 0.0}}, cfg);
        FAIL("expected no convergence");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::no_convergence);
        CHECK(std::string(e.what()).find("best residual") != std::string::npos);
    }
}

TEST_CASE("multiple equilibria are all reported and the score selects")
{
    // Coordination game: u_i = c_i - a_i^2/2 + 0.8 a_i a_j  gives g_i(x) = x - 0.8 a_j;
    // with f_i = a_i and y = 0 the best response is clamp(0.8 a_j) on [0, 1].
    // Only (0, 0) is a fixed point there, so use a steeper, clamped complementarity:
    // u_i = c_i - a_i^2/2 + 1.5 a_i a_j, y = (-0.25, -0.25) -> BR = clamp(1.5 a_j - 0.25).
    // Fixed points: (0, 0), (0.5, 0.5) (unstable), (1, 1).
    Linquad o;
    auto spec = mhc::testing::linquad_spec(o);
    for (std::size_t i = 0; i < 2; ++i) {
        Matrix h(3, 3);
        h(i, i) = -1.0;
        h(i, 1 - i) = h(1 - i, i) = 1.5;
        spec.agents[i].utility = CatalogEntry::linquad(0.0, {0.0, 0.0, 1.0}, h);
    }
    const Problem p(spec);
    const IncentiveState inc{{-0.25, -0.25}, {0.0, 0.0}};
    const auto res = nash_solve(p, inc);
    CHECK(res.multiple);
    REQUIRE(res.equilibria.size() == 2);
    // default score u_P = sum(a - c) prefers (1, 1)
    CHECK(res.action()[0] == doctest::Approx(1.0));
    const auto low = nash_solve(p, inc, {}, [](std::span<const double> a) { return -a[0] - a[1]; });
    CHECK(low.action()[0] == doctest::Approx(0.0));
}

TEST_CASE("equilibrium properties on random incentives")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double gamma : {0.0, 0.1, 0.3}) {
        Linquad o;
        o.gamma = gamma;
        const auto p = linquad_problem(o);
        const auto bounds = y_bounds(p);
        for (int k = 0; k < 30; ++k) {
            IncentiveState inc{{0, 0}, {u(rng), u(rng)}};
            for (std::size_t i = 0; i < 2; ++i)
                inc.y[i] = bounds.beta[i] + u(rng) * (bounds.gamma[i] - bounds.beta[i]);
            const auto res = nash_solve(p, inc);
            for (const auto& a : res.equilibria) {
                for (std::size_t i = 0; i < 2; ++i) {
                    // fixed-point consistency
                    CHECK(std::abs(a[i] - best_response(p, i, a, inc.c[i], inc.y[i])) <= 1e-10);
                    // interior first-order identity
                    if (a[i] > 1e-6 && a[i] < 1.0 - 1e-6)
                        CHECK(std::abs(g_eval(p, i, a, inc.c[i], a[i]) - inc.y[i]) <= 1e-8);
                    // optimality against the zero action (the sound part of the participation argument)
                    std::vector<double> a0 = a;
                    a0[i] = 0.0;
                    CHECK(agent_objective(p, i, a, inc.c[i], inc.y[i], a[i]) >=
                          inc.y[i] * p.drift(i, a0) + p.utility(i, a0, inc.c[i]) - 1e-12);
                }
                for (double g : verify_nash(p, a, inc)) CHECK(g <= 1e-6);
            }
            if (gamma == 0.0) {
                for (std::size_t i = 0; i < 2; ++i)
                    CHECK(res.action()[i] == best_response(p, i, res.action(), inc.c[i], inc.y[i]));
            }
        }
    }
}

TEST_CASE("zero incentive keeps instantaneous utility nonnegative")
{
    const auto p = linquad_problem({});
    const IncentiveState inc{{0.0, 0.0}, {0.0, 0.4}};
    // y = 0 is below beta, which is fine for nash_solve: the clamped best response is 0
    const auto res = nash_solve(p, inc);
    for (std::size_t i = 0; i < 2; ++i) CHECK(p.utility(i, res.action(), inc.c[i]) >= -1e-9);
}
