#pragma once

#include <vector>

#include "isac/channel.hpp"

namespace isac {

struct EffectiveFronthaul {
    Eigen::VectorXd eta;  // distance-free: Λ = diag(eta) / d²
    Cmat left;            // U_CD or U_PE, orthonormal columns
    Cmat right;           // L_CD or L_PE, orthonormal columns
    FronthaulLink link = FronthaulLink::cd;
};

// Truncated SVD keeping `streams` singular values in descending order.
EffectiveFronthaul effective_fronthaul(const Cmat& h, double d_tu, FronthaulLink link, int streams);

// The `eta` of effective_fronthaul alone, from the eigenvalues of the smaller Gram matrix.
Eigen::VectorXd fronthaul_gains(const Cmat& h, double d_tu, int streams);

// Slot receiving the dominant PE singular value for the k-th pair: round-robin k mod J.
std::vector<int> pe_power_positions(int n_pe_subcarriers, int j_targets);

// Per-target PE gains for pair k, with the dominant value rotated into slot k mod J.
Eigen::VectorXd rotate_pe_gains(const Eigen::VectorXd& sorted, int pair_index);

struct SensingGeometry {
    Cmat g;                   // J x J
    Eigen::VectorXd omega_sen;  // J, includes the 1/d⁴ path loss
};

SensingGeometry sensing_geometry(const Vec3& uav, const std::vector<Vec3>& targets, int m, const ScenarioConfig& cfg,
                                 const FrameFading& f);

// |h^H w|² for the matched-filter beam of user u at power p.
double matched_filter_gain(const Cvec& h, const Cvec& steering, double p);

}  // namespace isac
