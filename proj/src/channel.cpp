#include "isac/channel.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "isac/beamforming.hpp"

namespace isac {

namespace {

constexpr double c_light = 299792458.0;
constexpr double four_pi = 4.0 * std::numbers::pi;

cplx complex_normal(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    double re = n(rng);
    double im = n(rng);
    return {re, im};
}

Angle draw_angle(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> el(-std::numbers::pi / 2, std::numbers::pi / 2);
    std::uniform_real_distribution<double> az(-std::numbers::pi, std::numbers::pi);
    Angle a;
    a.theta = el(rng);
    a.phi = az(rng);
    return a;
}

double checked_distance(const Vec3& a, const Vec3& b, const char* what) {
    double d = (a - b).norm();
    if (!(d > 0.0)) throw std::invalid_argument(std::string(what) + ": coincident positions");
    return d;
}

Cvec steer(const Angle& a, int m, const UpaDims& dims, const ScenarioConfig& cfg) {
    return upa_steering(a.theta, a.phi, m, dims, cfg).entries;
}

}  // namespace

double subcarrier_frequency(const ScenarioConfig& cfg, int m) {
    // 0-based m; centre frequencies are symmetric around f_c.
    return cfg.fc_hz + (m + 0.5 - cfg.m_subcarriers / 2.0) * cfg.bw_hz / cfg.m_subcarriers;
}

double subcarrier_wavelength(const ScenarioConfig& cfg, int m) { return c_light / subcarrier_frequency(cfg, m); }

SteeringVector upa_steering(double theta, double phi, int m, const UpaDims& dims, const ScenarioConfig& cfg) {
    SteeringVector sv;
    sv.dims = dims;
    sv.theta = theta;
    sv.phi = phi;
    sv.subcarrier = m;
    sv.entries.resize(dims.count());
    double spacing = c_light / cfg.fc_hz / 2.0;
    double k = 2.0 * std::numbers::pi / subcarrier_wavelength(cfg, m) * spacing;
    double ux = std::sin(theta) * std::cos(phi);
    double uy = std::sin(theta) * std::sin(phi);
    for (int p = 0; p < dims.length; ++p) {
        for (int q = 0; q < dims.width; ++q) {
            double phase = k * (p * ux + q * uy);
            sv.entries[p * dims.width + q] = std::polar(1.0, phase);
        }
    }
    return sv;
}

FrameFading draw_frame_fading(const ScenarioConfig& cfg, std::mt19937_64& rng) {
    const int m_count = cfg.m_subcarriers;
    FrameFading f;
    for (int u = 0; u < cfg.u_users; ++u) f.user.push_back(draw_angle(rng));
    for (int j = 0; j < cfg.j_targets; ++j) f.target.push_back(draw_angle(rng));
    f.cd_tx = draw_angle(rng);
    f.cd_rx = draw_angle(rng);
    f.pe_tx = draw_angle(rng);
    f.pe_rx = draw_angle(rng);
    f.user_gain.resize(cfg.u_users, m_count);
    f.target_gain.resize(cfg.j_targets, m_count);
    f.cd_gain.resize(m_count);
    f.pe_gain.resize(m_count);
    for (int m = 0; m < m_count; ++m) {
        for (int u = 0; u < cfg.u_users; ++u) f.user_gain(u, m) = complex_normal(rng);
        for (int j = 0; j < cfg.j_targets; ++j) f.target_gain(j, m) = complex_normal(rng);
        f.cd_gain[m] = complex_normal(rng);
        f.pe_gain[m] = complex_normal(rng);
        Cmat psi_cd(cfg.tbs_tx.count(), cfg.uav_rx.count());
        for (Eigen::Index i = 0; i < psi_cd.size(); ++i) psi_cd.data()[i] = complex_normal(rng);
        Cmat psi_pe(cfg.uav_tx.count(), cfg.tbs_rx.count());
        for (Eigen::Index i = 0; i < psi_pe.size(); ++i) psi_pe.data()[i] = complex_normal(rng);
        f.psi_cd.push_back(std::move(psi_cd));
        f.psi_pe.push_back(std::move(psi_pe));
    }
    return f;
}

FrameFading draw_frame_fading(const ScenarioConfig& cfg, std::uint64_t seed, int frame) {
    auto rng = derive_stream(seed, stream_tag::fading, static_cast<std::uint64_t>(frame));
    return draw_frame_fading(cfg, rng);
}

Cmat sensing_channel(const Vec3& uav, const Vec3& target, int m, const FrameFading& f, int j,
                     const ScenarioConfig& cfg) {
    double d = checked_distance(uav, target, "sensing_channel");
    double lambda = subcarrier_wavelength(cfg, m);
    double power = db_to_linear(cfg.g_uav_tx_dbi) * db_to_linear(cfg.g_uav_rx_dbi) * lambda * lambda * cfg.rcs_m2 /
                   (std::pow(four_pi, 3) * std::pow(d, 4));
    Cvec tx = steer(f.target[j], m, cfg.uav_tx, cfg);
    Cvec rx = steer(f.target[j], m, cfg.uav_rx, cfg);
    return std::sqrt(power) * f.target_gain(j, m) * tx * rx.adjoint();
}

Cvec dl_channel(const Vec3& uav, const Vec3& user, int m, const FrameFading& f, int u, const ScenarioConfig& cfg) {
    double d = checked_distance(uav, user, "dl_channel");
    double lambda = subcarrier_wavelength(cfg, m);
    double power = db_to_linear(cfg.g_uav_tx_dbi) * db_to_linear(cfg.g_ue_rx_dbi) * lambda * lambda /
                   (four_pi * four_pi * d * d);
    return std::sqrt(power) * f.user_gain(u, m) * steer(f.user[u], m, cfg.uav_tx, cfg);
}

Cmat fronthaul_channel(const Vec3& uav, const Vec3& tbs, int m, const FrameFading& f, const ScenarioConfig& cfg,
                       FronthaulLink link) {
    double d = checked_distance(uav, tbs, "fronthaul_channel");
    double lambda = subcarrier_wavelength(cfg, m);
    bool cd = link == FronthaulLink::cd;
    double g_tx = db_to_linear(cd ? cfg.g_tbs_tx_dbi : cfg.g_uav_tx_dbi);
    double g_rx = db_to_linear(cd ? cfg.g_uav_rx_dbi : cfg.g_tbs_rx_dbi);
    double power = g_tx * g_rx * lambda * lambda / (four_pi * four_pi * d * d);
    const Angle& a_tx = cd ? f.cd_tx : f.pe_tx;
    const Angle& a_rx = cd ? f.cd_rx : f.pe_rx;
    Cvec tx = steer(a_tx, m, cd ? cfg.tbs_tx : cfg.uav_tx, cfg);
    Cvec rx = steer(a_rx, m, cd ? cfg.uav_rx : cfg.tbs_rx, cfg);
    const Cmat& psi = cd ? f.psi_cd[m] : f.psi_pe[m];
    cplx gain = cd ? f.cd_gain[m] : f.pe_gain[m];
    double k = cfg.k_tu;
    double w_los = std::isinf(k) ? 1.0 : std::sqrt(k / (k + 1.0));
    double w_nlos = std::isinf(k) ? 0.0 : std::sqrt(1.0 / (k + 1.0));
    Cmat h = w_los * gain * tx * rx.adjoint() + w_nlos * psi;
    return std::sqrt(power) * h;
}

ChannelSet build_channel_set(const ScenarioConfig& cfg, const FrameFading& f, int frame) {
    const int U = cfg.u_users;
    const int J = cfg.j_targets;
    const double g_uav_tx = db_to_linear(cfg.g_uav_tx_dbi);
    const double g_uav_rx = db_to_linear(cfg.g_uav_rx_dbi);
    const double g_ue = db_to_linear(cfg.g_ue_rx_dbi);
    // Unit-distance reference points make the fronthaul SVD distance-free.
    const Vec3 origin = Vec3::Zero();
    const Vec3 unit = Vec3(1.0, 0.0, 0.0);

    ChannelSet ch;
    ch.frame = frame;
    ch.sc.resize(cfg.m_subcarriers);
    for (int m = 0; m < cfg.m_subcarriers; ++m) {
        SubcarrierChannels& s = ch.sc[m];
        double lambda = subcarrier_wavelength(cfg, m);
        double dl_scale = g_uav_tx * g_ue * lambda * lambda / (four_pi * four_pi);
        double sen_scale = g_uav_tx * g_uav_rx * lambda * lambda * cfg.rcs_m2 / std::pow(four_pi, 3);

        std::vector<Cvec> user_tx;
        for (int u = 0; u < U; ++u) user_tx.push_back(steer(f.user[u], m, cfg.uav_tx, cfg));
        s.omega_dl_bar.resize(U);
        s.g_dl.resize(U, U);
        for (int u = 0; u < U; ++u) {
            s.omega_dl_bar[u] = dl_scale * std::norm(f.user_gain(u, m));
            for (int v = 0; v < U; ++v) s.g_dl(u, v) = user_tx[u].dot(user_tx[v]);
        }
        s.g_dl_abs2 = s.g_dl.cwiseAbs2();

        Cmat rx(cfg.uav_rx.count(), J);
        for (int j = 0; j < J; ++j) rx.col(j) = steer(f.target[j], m, cfg.uav_rx, cfg);
        s.g_sen = rx.adjoint() * rx;
        s.omega_sen_bar.resize(J);
        for (int j = 0; j < J; ++j) s.omega_sen_bar[j] = sen_scale * std::norm(f.target_gain(j, m));

        Cmat h_cd = fronthaul_channel(unit, origin, m, f, cfg, FronthaulLink::cd);
        Cmat h_pe = fronthaul_channel(unit, origin, m, f, cfg, FronthaulLink::pe);
        s.eta_cd = fronthaul_gains(h_cd, 1.0, U);
        s.eta_pe_sorted = fronthaul_gains(h_pe, 1.0, J);
    }
    return ch;
}

void dump_channel_csv(std::ostream& out, const ChannelSet& ch, const FrameFading& f, bool header) {
    if (header) out << "frame,subcarrier,link_type,node_id,re,im,gain\n";
    out.precision(17);
    for (int m = 0; m < ch.m(); ++m) {
        const SubcarrierChannels& s = ch.sc[m];
        for (Eigen::Index u = 0; u < s.omega_dl_bar.size(); ++u) {
            cplx g = f.user_gain(u, m);
            out << ch.frame << ',' << m << ",dl," << u << ',' << g.real() << ',' << g.imag() << ','
                << s.omega_dl_bar[u] << '\n';
        }
        for (Eigen::Index j = 0; j < s.omega_sen_bar.size(); ++j) {
            cplx g = f.target_gain(j, m);
            out << ch.frame << ',' << m << ",sen," << j << ',' << g.real() << ',' << g.imag() << ','
                << s.omega_sen_bar[j] << '\n';
        }
        for (Eigen::Index i = 0; i < s.eta_cd.size(); ++i) {
            out << ch.frame << ',' << m << ",cd," << i << ",,," << s.eta_cd[i] << '\n';
        }
        for (Eigen::Index i = 0; i < s.eta_pe_sorted.size(); ++i) {
            out << ch.frame << ',' << m << ",pe," << i << ",,," << s.eta_pe_sorted[i] << '\n';
        }
    }
}

}  // namespace isac
