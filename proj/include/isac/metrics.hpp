#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isac/channel.hpp"

namespace isac {

struct Pair {
    int pe = 0;   // m, forwards the echo to the TBS
    int sen = 0;  // m', carries the probing signal
    bool operator==(const Pair&) const = default;
};

struct SubcarrierPlan {
    std::vector<std::uint8_t> alpha_dl, alpha_cd, alpha_sen, alpha_pe;
    std::vector<Pair> pairs;  // pairing order; pair k gets the dominant PE slot k mod J

    static SubcarrierPlan empty(int m);
    std::vector<int> dl_set() const;
    std::vector<int> cd_set() const;
    std::vector<int> sen_set() const;
    std::vector<int> pe_set() const;
};

// MDD plan checks: one link per subcarrier, |SEN| = |PE| = M/4, |CD| + |DL| = M/2 inside the first
// half, and a perfect SEN/PE matching. Returns an empty string when valid.
std::string check_mdd_plan(const SubcarrierPlan& plan, int m_subcarriers);

// Entries are indexed by subcarrier; p_dl and p_cd hold the merged variables p̄.
struct PowerPlan {
    Eigen::MatrixXd p_dl;   // U x M
    Eigen::MatrixXd p_cd;   // U x M
    Eigen::MatrixXd p_sen;  // J x M, indexed by the SEN subcarrier m'
    Eigen::MatrixXd p_pe;   // J x M, indexed by the PE subcarrier m (amplification coefficient)

    static PowerPlan zeros(int u, int j, int m);
};

struct Prefactors {
    double cd = 0.9;
    double dl = 0.8;
    double mi = 0.7;
};

Prefactors mdd_prefactors(int n_slots);
Prefactors tdma_prefactors(const TdmaSlots& slots, int n_slots);

struct Scene {
    const ScenarioConfig& cfg;
    const NodeLayout& layout;
    const ChannelSet& ch;
};

Vec3 uav_at(const ScenarioConfig& cfg, double x, double y);
double squared_distance(const Vec3& a, const Vec3& b);

// PE gains of every target on pair k (dominant value rotated to slot k mod J).
Eigen::VectorXd pe_gains(const Scene& s, const Pair& pair, int pair_index);

double rate_cd(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav, double prefactor);

struct DlRates {
    double total = 0.0;
    std::vector<double> per_user;
};

DlRates rate_dl(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav, double prefactor);

// Log-det rate with matched-filter precoders, for validation.
double rate_dl_logdet(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav,
                      double prefactor);

struct MiParts {
    double s = 0.0;  // S_MI
    double n = 0.0;  // N_MI
};

MiParts mi_parts(const Scene& s, const PowerPlan& pw, const Vec3& uav, int pair_index, const Pair& pair, int j);

double per_target_mi(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav,
                     int pair_index, int j, double prefactor);

// Per-target sums over all pairs.
std::vector<double> mi_per_target(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav,
                                  double prefactor);

double sensing_mi_logdet(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav,
                         int pair_index, double prefactor);

struct UavPower {
    double dl = 0.0;
    double sen = 0.0;
    double pe = 0.0;  // Σ P_MI, the relay output
    double total() const { return dl + sen + pe; }
    double peak_phase() const;
};

double relay_output_power(const Scene& s, const PowerPlan& pw, const Vec3& uav, const Pair& pair, int j);
UavPower uav_power_used(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav);
double tbs_power_used(const SubcarrierPlan& plan, const PowerPlan& pw);

// Tr(Π_SEN Σ_PE) from the full matrices, for validation.
double relay_power_trace(const Scene& s, const PowerPlan& pw, const Vec3& uav, const Pair& pair);

struct FrameResult {
    int frame = 0;
    Vec3 uav_pos = Vec3::Zero();
    double r_dl = 0.0;
    double r_cd = 0.0;
    double r_e2e = 0.0;
    std::vector<double> r_dl_user;
    std::vector<double> mi_per_target;
    double power_used_uav = 0.0;
    double power_used_tbs = 0.0;
    bool feasible = false;
    int sca_iters = 0;
    SubcarrierPlan plan;
    PowerPlan powers;

    double mi_total() const;
    double mi_min() const;
};

enum class FrameKind { mdd, tdma };

// Fills every metric; `feasible` and `sca_iters` are left to the caller.
FrameResult evaluate_frame(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav,
                           const Prefactors& pre, FrameKind kind);

}  // namespace isac
