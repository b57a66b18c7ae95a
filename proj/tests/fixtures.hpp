#pragma once

// Problem builders shared by the unit and acceptance suites.

#include <cstddef>
#include <vector>

#include "mhc/catalog.hpp"
#include "mhc/model.hpp"

namespace mhc::testing {

// u_i = c_i - kappa/2 a_i^2 - gamma a_i sum_{j != i} a_j,  f_i = a_i,
// u_P = sum_i (a_i - eta/2 a_i^2 - c_i),  Phi_i(z) = phi1 z + phi2/2 z^2.
struct Linquad {
    std::size_t n = 2;
    double kappa = 1.0;
    double gamma = 0.2;
    double a_max = 1.0;
    double c_max = 1.0;
    double r = 0.1;
    double horizon = 1.0;
    double sigma = 0.0;    // diagonal output noise
    double sigma_z = 0.0;  // diagonal Z noise
    double eta = 0.0;
    double phi1 = 0.0;
    double phi2 = 0.0;
};

inline CatalogEntry linquad_utility(std::size_t n, std::size_t i, double kappa, double gamma)
{
    std::vector<double> w(n + 1, 0.0);
    w[n] = 1.0;
    Matrix h(n + 1, n + 1);
    h(i, i) = -kappa;
    for (std::size_t j = 0; j < n; ++j)
        if (j != i) h(i, j) = h(j, i) = -gamma;
    return CatalogEntry::linquad(0.0, std::move(w), std::move(h));
}

inline CatalogEntry own_action(std::size_t n, std::size_t i)
{
    std::vector<double> w(n, 0.0);
    w[i] = 1.0;
    return CatalogEntry::linear(0.0, std::move(w));
}

inline ProblemSpec linquad_spec(const Linquad& o)
{
    ProblemSpec s;
    s.n = o.n;
    s.m = o.n;
    s.r = o.r;
    s.horizon = o.horizon;
    s.sigma = Matrix(o.n, o.n);
    for (std::size_t i = 0; i < o.n; ++i) {
        s.sigma(i, i) = o.sigma;
        AgentSpec ag;
        ag.a_max = o.a_max;
        ag.c_max = o.c_max;
        ag.utility = linquad_utility(o.n, i, o.kappa, o.gamma);
        ag.drift = own_action(o.n, i);
        ag.terminal = CatalogEntry::linquad(0.0, {o.phi1}, Matrix{{o.phi2}});
        s.agents.push_back(ag);
    }
    std::vector<double> wp(2 * o.n, 0.0);
    Matrix hp(2 * o.n, 2 * o.n);
    for (std::size_t i = 0; i < o.n; ++i) {
        wp[i] = 1.0;
        wp[o.n + i] = -1.0;
        hp(i, i) = -o.eta;
    }
    s.principal.utility = CatalogEntry::linquad(0.0, wp, hp);
    s.z = default_z_spec(o.n);
    s.z.m_z = o.n;
    s.z.sigma = Matrix(o.n, o.n);
    for (std::size_t i = 0; i < o.n; ++i) s.z.sigma(i, i) = o.sigma_z;
    return s;
}

inline Problem linquad_problem(const Linquad& o) { return Problem(linquad_spec(o)); }

// Zero principal payoff and zero terminal payoff on top of a linquad agent model.
inline ProblemSpec zero_spec(Linquad o)
{
    o.phi1 = 0.0;
    o.phi2 = 0.0;
    ProblemSpec s = linquad_spec(o);
    s.principal.utility = CatalogEntry::constant(2 * o.n, 0.0);
    return s;
}

}  // namespace mhc::testing
