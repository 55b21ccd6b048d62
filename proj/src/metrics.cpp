#include "isac/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "isac/beamforming.hpp"

namespace isac {

namespace {

std::vector<int> indices_of(const std::vector<std::uint8_t>& a) {
    std::vector<int> out;
    for (int m = 0; m < static_cast<int>(a.size()); ++m) {
        if (a[m]) out.push_back(m);
    }
    return out;
}

double log2_det_hpd(const Cmat& a) {
    Eigen::LLT<Cmat> llt(a);
    if (llt.info() != Eigen::Success) throw std::runtime_error("log-det of a matrix that is not positive definite");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) acc += std::log2(std::real(llt.matrixL()(i, i)));
    return 2.0 * acc;
}

double squared_distance_xy(const Vec3& a, const Vec3& b) { return (a - b).squaredNorm(); }

}  // namespace

SubcarrierPlan SubcarrierPlan::empty(int m) {
    SubcarrierPlan p;
    p.alpha_dl.assign(m, 0);
    p.alpha_cd.assign(m, 0);
    p.alpha_sen.assign(m, 0);
    p.alpha_pe.assign(m, 0);
    return p;
}

std::vector<int> SubcarrierPlan::dl_set() const { return indices_of(alpha_dl); }
std::vector<int> SubcarrierPlan::cd_set() const { return indices_of(alpha_cd); }
std::vector<int> SubcarrierPlan::sen_set() const { return indices_of(alpha_sen); }
std::vector<int> SubcarrierPlan::pe_set() const { return indices_of(alpha_pe); }

std::string check_mdd_plan(const SubcarrierPlan& plan, int m_subcarriers) {
    const int M = m_subcarriers;
    for (const auto* a : {&plan.alpha_dl, &plan.alpha_cd, &plan.alpha_sen, &plan.alpha_pe}) {
        if (static_cast<int>(a->size()) != M) return "indicator length differs from M";
    }
    int n_dl = 0, n_cd = 0, n_sen = 0, n_pe = 0;
    for (int m = 0; m < M; ++m) {
        int used = plan.alpha_dl[m] + plan.alpha_cd[m] + plan.alpha_sen[m] + plan.alpha_pe[m];
        if (used > 1) return "subcarrier " + std::to_string(m) + " is assigned twice";
        bool lower = m < M / 2;
        if (lower && (plan.alpha_sen[m] || plan.alpha_pe[m])) return "SEN/PE subcarrier outside the upper half";
        if (!lower && (plan.alpha_dl[m] || plan.alpha_cd[m])) return "DL/CD subcarrier outside the lower half";
        n_dl += plan.alpha_dl[m];
        n_cd += plan.alpha_cd[m];
        n_sen += plan.alpha_sen[m];
        n_pe += plan.alpha_pe[m];
    }
    if (n_sen != M / 4 || n_pe != M / 4) return "|SEN| and |PE| must both equal M/4";
    if (n_dl + n_cd != M / 2) return "|CD| + |DL| must equal M/2";
    if (static_cast<int>(plan.pairs.size()) != M / 4) return "pairing must hold M/4 pairs";
    std::vector<int> seen_pe(M, 0), seen_sen(M, 0);
    for (const Pair& p : plan.pairs) {
        if (p.pe < 0 || p.pe >= M || p.sen < 0 || p.sen >= M) return "pair index out of range";
        if (!plan.alpha_pe[p.pe] || !plan.alpha_sen[p.sen]) return "pair uses a subcarrier outside PE/SEN";
        if (seen_pe[p.pe]++ || seen_sen[p.sen]++) return "subcarrier paired more than once";
    }
    return {};
}

PowerPlan PowerPlan::zeros(int u, int j, int m) {
    PowerPlan p;
    p.p_dl = Eigen::MatrixXd::Zero(u, m);
    p.p_cd = Eigen::MatrixXd::Zero(u, m);
    p.p_sen = Eigen::MatrixXd::Zero(j, m);
    p.p_pe = Eigen::MatrixXd::Zero(j, m);
    return p;
}

Prefactors mdd_prefactors(int n_slots) {
    double ns = n_slots;
    return {(ns - 1.0) / ns, (ns - 2.0) / ns, (ns - 3.0) / ns};
}

Prefactors tdma_prefactors(const TdmaSlots& slots, int n_slots) {
    double ns = n_slots;
    // MI is limited by the single forwarding phase.
    return {slots.cd / ns, slots.dl / ns, std::min(slots.sen, slots.pe) / ns};
}

Vec3 uav_at(const ScenarioConfig& cfg, double x, double y) { return {x, y, cfg.uav_alt_m}; }

double squared_distance(const Vec3& a, const Vec3& b) { return squared_distance_xy(a, b); }

Eigen::VectorXd pe_gains(const Scene& s, const Pair& pair, int pair_index) {
    return rotate_pe_gains(s.ch.sc[pair.pe].eta_pe_sorted, pair_index);
}

double rate_cd(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav, double prefactor) {
    const double n0z = s.cfg.n0_w() * squared_distance(uav, s.cfg.tbs_pos);
    double acc = 0.0;
    for (int m : plan.cd_set()) {
        const Eigen::VectorXd& eta = s.ch.sc[m].eta_cd;
        for (int u = 0; u < s.cfg.u_users; ++u) acc += std::log2(1.0 + pw.p_cd(u, m) * eta[u] / n0z);
    }
    return prefactor * acc;
}

DlRates rate_dl(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav, double prefactor) {
    const int U = s.cfg.u_users;
    const double n0 = s.cfg.n0_w();
    DlRates out;
    out.per_user.assign(U, 0.0);
    for (int m : plan.dl_set()) {
        const SubcarrierChannels& c = s.ch.sc[m];
        for (int u = 0; u < U; ++u) {
            double z = squared_distance(uav, s.layout.users[u]);
            double sig = pw.p_dl(u, m) * c.omega_dl_bar[u] * c.g_dl_abs2(u, u);
            double interf = 0.0;
            for (int v = 0; v < U; ++v) {
                if (v != u) interf += pw.p_dl(v, m) * c.omega_dl_bar[u] * c.g_dl_abs2(v, u);
            }
            out.per_user[u] += prefactor * std::log2(1.0 + sig / (interf + n0 * z));
        }
    }
    for (double r : out.per_user) out.total += r;
    return out;
}

double rate_dl_logdet(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav,
                      double prefactor) {
    const int U = s.cfg.u_users;
    const double n0 = s.cfg.n0_w();
    double acc = 0.0;
    for (int m : plan.dl_set()) {
        const SubcarrierChannels& c = s.ch.sc[m];
        // (H^H W)_{u,v} = sqrt(Ω_u) α_u^H α_v sqrt(p_v); fading phases cancel in the determinant.
        Cmat hw(U, U);
        for (int u = 0; u < U; ++u) {
            double om = c.omega_dl_bar[u] / squared_distance(uav, s.layout.users[u]);
            for (int v = 0; v < U; ++v) hw(u, v) = std::sqrt(om * pw.p_dl(v, m)) * c.g_dl(u, v);
        }
        Cmat a = Cmat::Identity(U, U) + hw * hw.adjoint() / n0;
        acc += log2_det_hpd(a);
    }
    return prefactor * acc;
}

MiParts mi_parts(const Scene& s, const PowerPlan& pw, const Vec3& uav, int pair_index, const Pair& pair, int j) {
    const int J = s.cfg.j_targets;
    const double n0 = s.cfg.n0_w();
    const double xi = s.cfg.xi_sic();
    const SubcarrierChannels& c = s.ch.sc[pair.sen];
    double eta = pe_gains(s, pair, pair_index)[j];
    double z_tu = squared_distance(uav, s.cfg.tbs_pos);
    double amp = eta * pw.p_pe(j, pair.pe) / z_tu;
    double own = 0.0, others = 0.0, leak = 0.0;
    for (int k = 0; k < J; ++k) {
        double ps = pw.p_sen(k, pair.sen);
        double z = squared_distance(uav, s.layout.targets[k]);
        double echo = ps * std::norm(c.g_sen(j, k)) * c.omega_sen_bar[k] / (z * z);
        (k == j ? own : others) += echo;
        leak += ps * xi;
    }
    MiParts out;
    out.n = amp * (others + leak + n0) + n0;
    out.s = out.n + amp * own;
    return out;
}

double per_target_mi(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav,
                     int pair_index, int j, double prefactor) {
    const Pair& pair = plan.pairs.at(pair_index);
    if (!plan.alpha_pe[pair.pe] || !plan.alpha_sen[pair.sen]) return 0.0;
    MiParts p = mi_parts(s, pw, uav, pair_index, pair, j);
    return prefactor * std::log2(p.s / p.n);
}

std::vector<double> mi_per_target(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav,
                                  double prefactor) {
    std::vector<double> out(s.cfg.j_targets, 0.0);
    for (int k = 0; k < static_cast<int>(plan.pairs.size()); ++k) {
        for (int j = 0; j < s.cfg.j_targets; ++j) out[j] += per_target_mi(s, plan, pw, uav, k, j, prefactor);
    }
    return out;
}

double sensing_mi_logdet(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav,
                         int pair_index, double prefactor) {
    const Pair& pair = plan.pairs.at(pair_index);
    if (!plan.alpha_pe[pair.pe] || !plan.alpha_sen[pair.sen]) return 0.0;
    const int J = s.cfg.j_targets;
    const double n0 = s.cfg.n0_w();
    const SubcarrierChannels& c = s.ch.sc[pair.sen];
    Eigen::VectorXd eta = pe_gains(s, pair, pair_index);
    double z_tu = squared_distance(uav, s.cfg.tbs_pos);
    const double r_rx = s.cfg.uav_rx.count();

    Eigen::VectorXd d(J), om_ps(J);
    double tr_sen = 0.0;
    for (int k = 0; k < J; ++k) {
        d[k] = std::sqrt(eta[k] / z_tu * pw.p_pe(k, pair.pe));
        double z = squared_distance(uav, s.layout.targets[k]);
        om_ps[k] = c.omega_sen_bar[k] / (z * z) * pw.p_sen(k, pair.sen);
        tr_sen += pw.p_sen(k, pair.sen);
    }
    // Unit-norm sensing combiners: the forwarded noise covariance is G / R_rx.
    Cmat dg = d.asDiagonal() * c.g_sen;
    Cmat signal = dg * om_ps.asDiagonal() * dg.adjoint();
    Cmat gamma = (s.cfg.xi_sic() * tr_sen + n0) / r_rx * (dg * d.asDiagonal()) + n0 * Cmat::Identity(J, J);
    gamma = 0.5 * (gamma + gamma.adjoint()).eval();
    Cmat total = signal + gamma;
    total = 0.5 * (total + total.adjoint()).eval();
    return prefactor * (log2_det_hpd(total) - log2_det_hpd(gamma));
}

double UavPower::peak_phase() const { return std::max({dl, sen, pe}); }

double relay_output_power(const Scene& s, const PowerPlan& pw, const Vec3& uav, const Pair& pair, int j) {
    const int J = s.cfg.j_targets;
    const SubcarrierChannels& c = s.ch.sc[pair.sen];
    double e = s.cfg.n0_w();
    for (int k = 0; k < J; ++k) {
        double z = squared_distance(uav, s.layout.targets[k]);
        e += pw.p_sen(k, pair.sen) * (std::norm(c.g_sen(j, k)) * c.omega_sen_bar[k] / (z * z) + s.cfg.xi_sic());
    }
    return pw.p_pe(j, pair.pe) * e;
}

UavPower uav_power_used(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav) {
    UavPower out;
    for (int m : plan.dl_set()) out.dl += pw.p_dl.col(m).sum();
    for (int m : plan.sen_set()) out.sen += pw.p_sen.col(m).sum();
    for (const Pair& p : plan.pairs) {
        for (int j = 0; j < s.cfg.j_targets; ++j) out.pe += relay_output_power(s, pw, uav, p, j);
    }
    return out;
}

double tbs_power_used(const SubcarrierPlan& plan, const PowerPlan& pw) {
    double acc = 0.0;
    for (int m : plan.cd_set()) acc += pw.p_cd.col(m).sum();
    return acc;
}

double relay_power_trace(const Scene& s, const PowerPlan& pw, const Vec3& uav, const Pair& pair) {
    const int J = s.cfg.j_targets;
    const SubcarrierChannels& c = s.ch.sc[pair.sen];
    Eigen::VectorXd om_ps(J), p_pe(J);
    double tr_sen = 0.0;
    for (int k = 0; k < J; ++k) {
        double z = squared_distance(uav, s.layout.targets[k]);
        om_ps[k] = c.omega_sen_bar[k] / (z * z) * pw.p_sen(k, pair.sen);
        tr_sen += pw.p_sen(k, pair.sen);
        p_pe[k] = pw.p_pe(k, pair.pe);
    }
    const double r_rx = s.cfg.uav_rx.count();
    Cmat pi = c.g_sen.adjoint() * om_ps.asDiagonal() * c.g_sen +
              (s.cfg.xi_sic() * tr_sen + s.cfg.n0_w()) / r_rx * c.g_sen;
    return std::real((pi * p_pe.asDiagonal()).trace());
}

double FrameResult::mi_total() const {
    double acc = 0.0;
    for (double v : mi_per_target) acc += v;
    return acc;
}

double FrameResult::mi_min() const {
    if (mi_per_target.empty()) return 0.0;
    return *std::min_element(mi_per_target.begin(), mi_per_target.end());
}

FrameResult evaluate_frame(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav,
                           const Prefactors& pre, FrameKind kind) {
    FrameResult r;
    r.frame = s.ch.frame;
    r.uav_pos = uav;
    r.plan = plan;
    r.powers = pw;
    DlRates dl = rate_dl(s, plan, pw, uav, pre.dl);
    r.r_dl = dl.total;
    r.r_dl_user = dl.per_user;
    r.r_cd = rate_cd(s, plan, pw, uav, pre.cd);
    r.r_e2e = std::min(r.r_dl, r.r_cd);
    r.mi_per_target = mi_per_target(s, plan, pw, uav, pre.mi);
    UavPower up = uav_power_used(s, plan, pw, uav);
    r.power_used_uav = kind == FrameKind::mdd ? up.total() : up.peak_phase();
    r.power_used_tbs = tbs_power_used(plan, pw);
    return r;
}

}  // namespace isac
