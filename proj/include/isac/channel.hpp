#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "isac/scenario.hpp"

namespace isac {

using cplx = std::complex<double>;
using Cvec = Eigen::VectorXcd;
using Cmat = Eigen::MatrixXcd;

double subcarrier_frequency(const ScenarioConfig& cfg, int m);
double subcarrier_wavelength(const ScenarioConfig& cfg, int m);

struct SteeringVector {
    Cvec entries;
    UpaDims dims;
    double theta = 0.0;
    double phi = 0.0;
    int subcarrier = 0;
};

// Half-wavelength (at f_c) UPA; element (p, q) sits at index p * width + q.
SteeringVector upa_steering(double theta, double phi, int m, const UpaDims& dims, const ScenarioConfig& cfg);

struct Angle {
    double theta = 0.0;
    double phi = 0.0;
};

// Everything random about one radio frame. Delay and Doppler phases are folded into the
// complex gains, so magnitudes never depend on them.
struct FrameFading {
    std::vector<Angle> user;    // UAV AoD towards each user
    std::vector<Angle> target;  // monostatic: AoD equals AoA
    Angle cd_tx, cd_rx;         // TBS transmit, UAV receive
    Angle pe_tx, pe_rx;         // UAV transmit, TBS receive
    Cmat user_gain;             // U x M
    Cmat target_gain;           // J x M
    Cvec cd_gain;               // M
    Cvec pe_gain;               // M
    std::vector<Cmat> psi_cd;   // M matrices, R̄_tx x R_rx
    std::vector<Cmat> psi_pe;   // M matrices, R_tx x R̄_rx
};

FrameFading draw_frame_fading(const ScenarioConfig& cfg, std::mt19937_64& stream);
FrameFading draw_frame_fading(const ScenarioConfig& cfg, std::uint64_t seed, int frame);

Cmat sensing_channel(const Vec3& uav, const Vec3& target, int m, const FrameFading& f, int j,
                     const ScenarioConfig& cfg);
Cvec dl_channel(const Vec3& uav, const Vec3& user, int m, const FrameFading& f, int u, const ScenarioConfig& cfg);

enum class FronthaulLink { cd, pe };
Cmat fronthaul_channel(const Vec3& uav, const Vec3& tbs, int m, const FrameFading& f, const ScenarioConfig& cfg,
                       FronthaulLink link);

// Distance-free per-subcarrier quantities. Position enters every metric only through the
// squared distances Z, which callers compute on demand.
struct SubcarrierChannels {
    Eigen::VectorXd omega_dl_bar;   // U: G_tx G_ue λ² |ϖ|² / (4π)²
    Cmat g_dl;                      // U x U: α_tx(u)^H α_tx(u'), row u
    Eigen::MatrixXd g_dl_abs2;      // elementwise |g_dl|²
    Eigen::VectorXd omega_sen_bar;  // J: G_tx G_rx λ² σ |ϖ|² / (4π)³
    Cmat g_sen;                     // J x J receive Gram matrix
    Eigen::VectorXd eta_cd;         // U strongest, descending
    Eigen::VectorXd eta_pe_sorted;  // J strongest, descending
};

struct ChannelSet {
    int frame = 0;
    std::vector<SubcarrierChannels> sc;
    int m() const { return static_cast<int>(sc.size()); }
};

ChannelSet build_channel_set(const ScenarioConfig& cfg, const FrameFading& f, int frame);

// CSV rows: frame,subcarrier,link_type,node_id,re,im,gain
void dump_channel_csv(std::ostream& out, const ChannelSet& ch, const FrameFading& f, bool header);

}  // namespace isac
