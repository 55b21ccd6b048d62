#include "isac/surrogates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace isac {

double quad_transform_v(double s, double n) {
    if (!(n > 0.0)) throw std::invalid_argument("quad_transform_v: n must be positive");
    if (s < 0.0) throw std::invalid_argument("quad_transform_v: s must be nonnegative");
    return std::sqrt(s) / n;
}

double surrogate_log_rate(double s, double n, double v) {
    double arg = 1.0 + 2.0 * v * std::sqrt(std::max(s, 0.0)) - v * v * n;
    if (!(arg > 0.0)) return -std::numeric_limits<double>::infinity();
    return std::log2(arg);
}

MiInputs mi_inputs(const Scene& s, const Pair& pair, int pair_index, int j) {
    const int J = s.cfg.j_targets;
    const SubcarrierChannels& c = s.ch.sc[pair.sen];
    MiInputs in;
    in.j = j;
    in.eta = pe_gains(s, pair, pair_index)[j];
    in.a.resize(J);
    in.target_dz2.resize(J);
    for (int k = 0; k < J; ++k) {
        in.a[k] = std::norm(c.g_sen(j, k)) * c.omega_sen_bar[k];
        const Vec3& t = s.layout.targets[k];
        in.targets.emplace_back(t.x(), t.y());
        double dz = s.cfg.uav_alt_m - t.z();
        in.target_dz2[k] = dz * dz;
    }
    in.tbs = {s.cfg.tbs_pos.x(), s.cfg.tbs_pos.y()};
    double dz = s.cfg.uav_alt_m - s.cfg.tbs_pos.z();
    in.tbs_dz2 = dz * dz;
    in.xi = s.cfg.xi_sic();
    in.n0 = s.cfg.n0_w();
    return in;
}

MiValue mi_evaluate(const MiInputs& in, const MiPoint& q) {
    const int J = static_cast<int>(in.a.size());
    if (q.p_sen.size() != J) throw std::invalid_argument("mi_evaluate: p_sen size differs from J");
    const int ix = J + 1, iy = J + 2;
    double dxt = q.x - in.tbs.x(), dyt = q.y - in.tbs.y();
    double z_tu = dxt * dxt + dyt * dyt + in.tbs_dz2;
    if (!(z_tu > 0.0)) throw std::invalid_argument("mi_evaluate: UAV coincides with the TBS");
    const double amp = in.eta * q.p_pe / z_tu;

    MiValue v;
    v.ds = Eigen::VectorXd::Zero(J + 3);
    v.dn = Eigen::VectorXd::Zero(J + 3);
    v.dp = Eigen::VectorXd::Zero(J + 3);

    // E_own / E_rest: echo power reaching the UAV, with and without target j's own return.
    double e_all = in.n0, e_rest = in.n0;
    double dex_all = 0.0, dey_all = 0.0, dex_rest = 0.0, dey_rest = 0.0;
    for (int k = 0; k < J; ++k) {
        double dx = q.x - in.targets[k].x(), dy = q.y - in.targets[k].y();
        double z = dx * dx + dy * dy + in.target_dz2[k];
        if (!(z > 0.0)) throw std::invalid_argument("mi_evaluate: UAV coincides with a target");
        double echo = in.a[k] / (z * z);
        double ps = q.p_sen[k];
        double unit_all = echo + in.xi;
        double unit_rest = (k == in.j ? 0.0 : echo) + in.xi;
        e_all += ps * unit_all;
        e_rest += ps * unit_rest;
        // d(echo)/dx = -4 a (x - x_k) / z³
        double gx = -4.0 * in.a[k] * dx / (z * z * z);
        double gy = -4.0 * in.a[k] * dy / (z * z * z);
        dex_all += ps * gx;
        dey_all += ps * gy;
        if (k != in.j) {
            dex_rest += ps * gx;
            dey_rest += ps * gy;
        }
        v.ds[1 + k] = amp * unit_all;
        v.dn[1 + k] = amp * unit_rest;
        v.dp[1 + k] = q.p_pe * unit_all;
    }
    v.s = amp * e_all + in.n0;
    v.n = amp * e_rest + in.n0;
    v.p_mi = q.p_pe * e_all;

    v.ds[0] = in.eta / z_tu * e_all;
    v.dn[0] = in.eta / z_tu * e_rest;
    v.dp[0] = e_all;

    // amp depends on position through Z_TU: d(amp)/dx = -2 amp (x - x_T) / Z_TU.
    double damp_x = -2.0 * amp * dxt / z_tu;
    double damp_y = -2.0 * amp * dyt / z_tu;
    v.ds[ix] = amp * dex_all + damp_x * e_all;
    v.ds[iy] = amp * dey_all + damp_y * e_all;
    v.dn[ix] = amp * dex_rest + damp_x * e_rest;
    v.dn[iy] = amp * dey_rest + damp_y * e_rest;
    v.dp[ix] = q.p_pe * dex_all;
    v.dp[iy] = q.p_pe * dey_all;
    return v;
}

MiLinear mi_linearization(const MiInputs& in, const MiPoint& q0, LinearizationScale scale) {
    MiValue v = mi_evaluate(in, q0);
    MiLinear lin;
    lin.anchor = q0;
    lin.log_s = std::log(v.s);
    lin.log_n = std::log(v.n);
    double ks = scale == LinearizationScale::taylor ? 1.0 / v.s : 1.0 / (lin.log_s * lin.log_s);
    double kn = scale == LinearizationScale::taylor ? 1.0 / v.n : 1.0 / (lin.log_n * lin.log_n);
    lin.gs = ks * v.ds;
    lin.gn = kn * v.dn;
    return lin;
}

TrustRegion TrustRegion::defaults(const ScenarioConfig& cfg) {
    TrustRegion t;
    t.mu_p = cfg.p_uav_w() / 20.0;
    t.mu_s = cfg.p_uav_w() / 20.0;
    t.mu_x = cfg.max_step_m();
    t.mu_y = cfg.max_step_m();
    t.theta = 1.0;
    return t;
}

double TrustRegion::schedule(int k) { return std::max(std::pow(0.9, k), 0.05); }

double velocity_excess(const ScenarioConfig& cfg, const Vec3& prev, const Vec3& next) {
    Eigen::Vector2d d(next.x() - prev.x(), next.y() - prev.y());
    return d.norm() - cfg.max_step_m();
}

}  // namespace isac
