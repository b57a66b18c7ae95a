#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mhc/dynamics.hpp"
#include "mhc/grid.hpp"
#include "mhc/model.hpp"

namespace mhc {

struct AuditConfig {
    std::size_t n_paths = 2000;
    double dt = 0.01;
    std::uint64_t seed = 0;
    std::size_t deviations = 200;
    double ic_tol = 1e-6;
    double ic_allowance = 0.0;  // extra slack for interpolated policies
    double ir_tol = 1e-9;
    double instantaneous_tol = 1e-6;
    double drift_allowance = 0.0;  // fitted truncation bias, if known
    int threads = 0;
};

struct PromiseResult {
    double dt = 0.0;
    double coarse_dt = 0.0;  // 0 when no coarser level fits in [0, T]
    std::vector<double> w0;
    std::vector<Estimate> estimate;    // at dt
    std::vector<double> coarse_mean;   // at 2 dt
    std::vector<double> gap;           // |U_i - w0_i|
    std::vector<double> allowance;     // C_dt dt, from |U(2dt) - U(dt)|
    std::vector<double> tolerance;     // 3 SE + allowance
    std::vector<bool> agent_passed;
    bool passed = true;
};

struct IcResult {
    std::vector<double> max_gain;
    double tolerance = 0.0;
    std::size_t samples = 0;
    std::vector<bool> agent_passed;
    bool passed = true;
};

struct ParticipationResult {
    std::vector<Estimate> ir_values;  // U_i at t = 0
    std::vector<double> ir_tolerance;
    bool ir_passed = true;
    std::vector<double> min_instantaneous;  // min over sampled steps of u_i(a, c_i)
    double instantaneous_tol = 0.0;
    bool instantaneous_passed = true;
    bool passed() const { return ir_passed && instantaneous_passed; }
};

// |W_i(T) - r Phi_i(Z_i(T))| over paths; reported, not asserted.
struct TerminalGapStats {
    std::vector<double> mean;
    std::vector<double> max;
    bool z_noise = false;  // sigma_Z != 0: the identity is not expected to hold pathwise
};

struct DriftStats {
    Estimate drift;  // per-path time-averaged drift, averaged over paths
    std::size_t points = 0;
    double allowance = 0.0;
    double tolerance = 0.0;
    bool passed = true;
};

struct AuditReport {
    PromiseResult promise;
    IcResult ic;
    ParticipationResult participation;
    TerminalGapStats terminal;
    std::optional<DriftStats> drift;
    AuditConfig config;

    bool passed() const;
};

PromiseResult promise_keeping_check(const Problem& problem, const Policy& policy, std::span<const double> w0,
                                    std::span<const double> z0, const AuditConfig& cfg);

IcResult ic_audit(const Problem& problem, const Policy& policy, std::span<const double> w0,
                  std::span<const double> z0, const AuditConfig& cfg);

ParticipationResult participation_check(const Problem& problem, const Policy& policy, std::span<const double> w0,
                                        std::span<const double> z0, const AuditConfig& cfg);

TerminalGapStats terminal_gaps(const Problem& problem, const SimulationBatch& batch);

// principal_value_drift along on-policy paths of a solved field
DriftStats drift_check(const Problem& problem, const ValueField& value, const Policy& policy,
                       std::span<const double> w0, std::span<const double> z0, const AuditConfig& cfg);

AuditReport run_audit(const Problem& problem, const Policy& policy, std::span<const double> w0,
                      std::span<const double> z0, const AuditConfig& cfg, const ValueField* value = nullptr);

std::string audit_json(const AuditReport& report);
// check, agent, value, se, tolerance, passed
void write_audit_csv(std::ostream& out, const AuditReport& report);

}  // namespace mhc
