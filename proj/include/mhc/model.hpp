#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mhc/catalog.hpp"
#include "mhc/matrix.hpp"

namespace mhc {

inline constexpr std::size_t kMaxAgents = 16;

// Argument conventions for the catalog entries:
//   utility  u_i   (a_1..a_n, c_i)
//   drift    f_i   (a_1..a_n)
//   terminal Phi_i (z_i)
//   principal u_P  (a_1..a_n, c_1..c_n)
//   z drift  mu_Zi (a_1..a_n, c_1..c_n)
struct AgentSpec {
    double a_max = 1.0;
    double c_max = 1.0;
    CatalogEntry utility;
    CatalogEntry drift;
    CatalogEntry terminal;
};

struct PrincipalSpec {
    CatalogEntry utility;
};

struct ZSpec {
    std::vector<CatalogEntry> mu;
    Matrix sigma;  // n x m_z
    std::size_t m_z = 1;
};

struct ProblemSpec {
    std::size_t n = 1;
    std::size_t m = 1;
    double r = 0.1;
    double horizon = 1.0;
    std::vector<AgentSpec> agents;
    PrincipalSpec principal;
    ZSpec z;
    Matrix sigma;  // n x m, rows sigma_i
};

// mu_Zi(a, c) = a_i with no Z noise, i.e. Z_i(t) = r * integral of a_i.
ZSpec default_z_spec(std::size_t n);

// Immutable, structurally checked problem instance. Construction throws
// dimension_mismatch or domain_empty and binds every catalog entry to its
// box (A x C_i, A, A x C); terminal payoffs stay unbounded in z.
class Problem {
public:
    explicit Problem(ProblemSpec spec);

    const ProblemSpec& spec() const noexcept { return spec_; }
    std::size_t n() const noexcept { return spec_.n; }
    std::size_t m() const noexcept { return spec_.m; }
    std::size_t m_z() const noexcept { return spec_.z.m_z; }
    double r() const noexcept { return spec_.r; }
    double horizon() const noexcept { return spec_.horizon; }
    double a_max(std::size_t i) const noexcept { return spec_.agents[i].a_max; }
    double c_max(std::size_t i) const noexcept { return spec_.agents[i].c_max; }
    const Matrix& sigma() const noexcept { return spec_.sigma; }
    const Matrix& sigma_z() const noexcept { return spec_.z.sigma; }
    // sigma sigma^T and sigma_Z sigma_Z^T
    const Matrix& output_covariance() const noexcept { return output_cov_; }
    const Matrix& z_covariance() const noexcept { return z_cov_; }

    double utility(std::size_t i, std::span<const double> a, double c_i) const;
    double utility_da(std::size_t i, std::span<const double> a, double c_i, std::size_t k) const;
    double utility_daa(std::size_t i, std::span<const double> a, double c_i, std::size_t k,
                       std::size_t l) const;
    double utility_dc(std::size_t i, std::span<const double> a, double c_i) const;

    double drift(std::size_t i, std::span<const double> a) const;
    double drift_da(std::size_t i, std::span<const double> a, std::size_t k) const;
    double drift_daa(std::size_t i, std::span<const double> a, std::size_t k, std::size_t l) const;

    double terminal(std::size_t i, double z_i) const;
    double principal_utility(std::span<const double> a, std::span<const double> c) const;
    double z_drift(std::size_t i, std::span<const double> a, std::span<const double> c) const;

private:
    ProblemSpec spec_;
    Matrix output_cov_;
    Matrix z_cov_;
};

struct AssumptionCheck {
    int id = 0;  // 1..6 model assumptions, 7 g-monotonicity, 8 nonempty y interval
    std::string name;
    bool passed = true;
    std::vector<double> witness;  // (a_1..a_n, c_1..c_n) of the first failure
    std::string detail;
};

struct ValidationReport {
    std::vector<AssumptionCheck> checks;
    // Advisory only: joint concavity of every u_i in the full action vector.
    bool jointly_concave = true;
    std::vector<double> joint_concavity_witness;
    std::size_t sample_count = 0;

    bool all_passed() const;
    const AssumptionCheck& check(int id) const;
};

inline constexpr double kValidationTol = 1e-9;
inline constexpr double kDerivativeFloor = 1e-10;

ValidationReport validate_spec(const Problem& problem, std::size_t samples, std::uint64_t seed = 0);
ValidationReport validate_spec(const ProblemSpec& spec, std::size_t samples, std::uint64_t seed = 0);

}  // namespace mhc
