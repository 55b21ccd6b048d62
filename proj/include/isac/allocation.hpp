#pragma once

#include <random>
#include <vector>

#include "isac/metrics.hpp"

namespace isac {

// Indices are local to the upper half M^S (0 .. M/2 - 1).
struct SenPeSelection {
    std::vector<int> sen;     // in selection order
    std::vector<int> pe;      // ascending
    std::vector<Pair> pairs;  // local indices
};

// SEN takes the M/4 largest Tr(Ω_SEN) one at a time; the k-th pick is paired with the k-th
// largest Tr(Λ_PE) among the rest. Ties go to the lowest index.
SenPeSelection greedy_sen_pe(const Eigen::VectorXd& omega_traces, const Eigen::VectorXd& lambda_pe_traces,
                             int m_subcarriers);

// Pairs SEN (ordered by descending Tr(Ω_SEN)) with PE (ordered by descending Tr(Λ_PE)).
std::vector<Pair> pair_by_rank(const std::vector<int>& sen, const std::vector<int>& pe,
                               const Eigen::VectorXd& omega_traces, const Eigen::VectorXd& lambda_pe_traces);

// Keeps the sets when the MI did not drop; otherwise trades the SEN subcarrier with the largest
// Tr(Λ_PE) for the PE subcarrier with the smallest one and pairs again.
SenPeSelection repair_pairs(double prev_mi, double curr_mi, const SenPeSelection& sel,
                            const Eigen::VectorXd& omega_traces, const Eigen::VectorXd& lambda_pe_traces);

// Per-subcarrier traces over M^S at a UAV position.
Eigen::VectorXd sensing_traces(const Scene& s, const Vec3& uav);
Eigen::VectorXd pe_traces(const Scene& s, const Vec3& uav);

// MDD plan with SEN/PE from `sel` and every M^D subcarrier marked for CD where `cd_mask` is set,
// DL otherwise. `cd_mask` has M/2 entries.
SubcarrierPlan mdd_plan(int m_subcarriers, const SenPeSelection& sel, const std::vector<std::uint8_t>& cd_mask);

// Random split: coin-flip DL/CD with both sides non-empty, random SEN subset, random pairing.
SubcarrierPlan random_mdd_plan(int m_subcarriers, std::mt19937_64& rng);

// Time-division frame: each phase owns the whole band; pair k is (k, k).
SubcarrierPlan tdma_plan(int m_subcarriers);

struct L0Value {
    double upsilon = 0.0;        // 1 - exp(-trace / rho)
    double upsilon_tilde = 0.0;  // tangent majorizer at the expansion trace
};

L0Value l0_majorizer(double trace, double expansion_trace, double rho);

struct SmoothingState {
    double rho_dl = 0.0;
    double rho_cd = 0.0;
    static constexpr double floor = 1e-6;

    static SmoothingState initial(const ScenarioConfig& cfg);
    void advance();
};

}  // namespace isac
