#include "isac/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace isac {

EffectiveFronthaul effective_fronthaul(const Cmat& h, double d_tu, FronthaulLink link, int streams) {
    if (!h.allFinite()) throw std::invalid_argument("effective_fronthaul: non-finite channel");
    if (!(d_tu > 0.0)) throw std::invalid_argument("effective_fronthaul: d_tu must be positive");
    Eigen::JacobiSVD<Cmat> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    int k = std::min<int>(streams, static_cast<int>(sv.size()));

    // Eigen already sorts descending; the stable sort keeps index order on ties.
    std::vector<int> order(sv.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sv[a] > sv[b]; });

    EffectiveFronthaul out;
    out.link = link;
    out.eta.resize(k);
    out.left.resize(h.rows(), k);
    out.right.resize(h.cols(), k);
    for (int i = 0; i < k; ++i) {
        out.eta[i] = sv[order[i]] * sv[order[i]] * d_tu * d_tu;
        out.left.col(i) = svd.matrixU().col(order[i]);
        out.right.col(i) = svd.matrixV().col(order[i]);
    }
    return out;
}

Eigen::VectorXd fronthaul_gains(const Cmat& h, double d_tu, int streams) {
    if (!h.allFinite()) throw std::invalid_argument("fronthaul_gains: non-finite channel");
    if (!(d_tu > 0.0)) throw std::invalid_argument("fronthaul_gains: d_tu must be positive");
    Cmat gram = h.rows() >= h.cols() ? Cmat(h.adjoint() * h) : Cmat(h * h.adjoint());
    Eigen::SelfAdjointEigenSolver<Cmat> es(gram, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
    const int n = static_cast<int>(ev.size());
    const int k = std::min(streams, n);
    Eigen::VectorXd eta(k);
    for (int i = 0; i < k; ++i) eta[i] = std::max(ev[n - 1 - i], 0.0) * d_tu * d_tu;
    return eta;
}

std::vector<int> pe_power_positions(int n_pe_subcarriers, int j_targets) {
    if (n_pe_subcarriers < 0 || j_targets < 1) throw std::invalid_argument("pe_power_positions: bad counts");
    std::vector<int> slots(n_pe_subcarriers);
    for (int k = 0; k < n_pe_subcarriers; ++k) slots[k] = k % j_targets;
    return slots;
}

Eigen::VectorXd rotate_pe_gains(const Eigen::VectorXd& sorted, int pair_index) {
    const int J = static_cast<int>(sorted.size());
    Eigen::VectorXd out(J);
    for (int slot = 0; slot < J; ++slot) {
        int src = ((slot - pair_index) % J + J) % J;
        out[slot] = sorted[src];
    }
    return out;
}

SensingGeometry sensing_geometry(const Vec3& uav, const std::vector<Vec3>& targets, int m, const ScenarioConfig& cfg,
                                 const FrameFading& f) {
    const int J = static_cast<int>(targets.size());
    Cmat rx(cfg.uav_rx.count(), J);
    for (int j = 0; j < J; ++j) {
        rx.col(j) = upa_steering(f.target[j].theta, f.target[j].phi, m, cfg.uav_rx, cfg).entries;
    }
    SensingGeometry geo;
    geo.g = rx.adjoint() * rx;
    geo.omega_sen.resize(J);
    double lambda = subcarrier_wavelength(cfg, m);
    double scale = db_to_linear(cfg.g_uav_tx_dbi) * db_to_linear(cfg.g_uav_rx_dbi) * lambda * lambda * cfg.rcs_m2 /
                   std::pow(4.0 * std::numbers::pi, 3);
    for (int j = 0; j < J; ++j) {
        double d = (uav - targets[j]).norm();
        if (!(d > 0.0)) throw std::invalid_argument("sensing_geometry: UAV coincides with a target");
        geo.omega_sen[j] = scale * std::norm(f.target_gain(j, m)) / std::pow(d, 4);
    }
    return geo;
}

double matched_filter_gain(const Cvec& h, const Cvec& steering, double p) {
    return std::norm(h.dot(steering)) * p;
}

}  // namespace isac
