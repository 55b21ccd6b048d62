#include "isac/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace isac {

namespace {

std::vector<int> ranked(std::vector<int> idx, const Eigen::VectorXd& key) {
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (key[a] != key[b]) return key[a] > key[b];
        return a < b;
    });
    return idx;
}

}  // namespace

std::vector<Pair> pair_by_rank(const std::vector<int>& sen, const std::vector<int>& pe,
                               const Eigen::VectorXd& omega_traces, const Eigen::VectorXd& lambda_pe_traces) {
    if (sen.size() != pe.size()) throw std::invalid_argument("pair_by_rank: SEN and PE sizes differ");
    std::vector<int> s = ranked(sen, omega_traces);
    std::vector<int> p = ranked(pe, lambda_pe_traces);
    std::vector<Pair> out;
    for (std::size_t k = 0; k < s.size(); ++k) out.push_back({p[k], s[k]});
    return out;
}

SenPeSelection greedy_sen_pe(const Eigen::VectorXd& omega_traces, const Eigen::VectorXd& lambda_pe_traces,
                             int m_subcarriers) {
    const int half = m_subcarriers / 2;
    if (omega_traces.size() != half || lambda_pe_traces.size() != half) {
        throw std::invalid_argument("greedy_sen_pe: trace lists must cover M/2 subcarriers");
    }
    std::vector<std::uint8_t> taken(half, 0);
    SenPeSelection sel;
    for (int k = 0; k < m_subcarriers / 4; ++k) {
        int best = -1;
        for (int i = 0; i < half; ++i) {
            if (!taken[i] && (best < 0 || omega_traces[i] > omega_traces[best])) best = i;
        }
        taken[best] = 1;
        sel.sen.push_back(best);
    }
    for (int i = 0; i < half; ++i) {
        if (!taken[i]) sel.pe.push_back(i);
    }
    sel.pairs = pair_by_rank(sel.sen, sel.pe, omega_traces, lambda_pe_traces);
    return sel;
}

SenPeSelection repair_pairs(double prev_mi, double curr_mi, const SenPeSelection& sel,
                            const Eigen::VectorXd& omega_traces, const Eigen::VectorXd& lambda_pe_traces) {
    if (curr_mi >= prev_mi || sel.sen.empty()) return sel;
    auto by_lambda = [&](int a, int b) {
        return lambda_pe_traces[a] < lambda_pe_traces[b] || (lambda_pe_traces[a] == lambda_pe_traces[b] && a > b);
    };
    // max_element keeps the first maximum only under strict ordering; the comparator makes
    // lower indices win ties for both the argmax and the argmin.
    auto sen_max = std::max_element(sel.sen.begin(), sel.sen.end(), by_lambda);
    auto pe_min = std::min_element(sel.pe.begin(), sel.pe.end(), [&](int a, int b) {
        return lambda_pe_traces[a] < lambda_pe_traces[b] || (lambda_pe_traces[a] == lambda_pe_traces[b] && a < b);
    });
    SenPeSelection out = sel;
    int a = *sen_max;
    int b = *pe_min;
    std::replace(out.sen.begin(), out.sen.end(), a, b);
    std::replace(out.pe.begin(), out.pe.end(), b, a);
    std::sort(out.pe.begin(), out.pe.end());
    out.pairs = pair_by_rank(out.sen, out.pe, omega_traces, lambda_pe_traces);
    return out;
}

Eigen::VectorXd sensing_traces(const Scene& s, const Vec3& uav) {
    const int half = s.cfg.m_subcarriers / 2;
    Eigen::VectorXd out(half);
    for (int i = 0; i < half; ++i) {
        const SubcarrierChannels& c = s.ch.sc[half + i];
        double acc = 0.0;
        for (int j = 0; j < s.cfg.j_targets; ++j) {
            double z = squared_distance(uav, s.layout.targets[j]);
            acc += c.omega_sen_bar[j] / (z * z);
        }
        out[i] = acc;
    }
    return out;
}

Eigen::VectorXd pe_traces(const Scene& s, const Vec3& uav) {
    const int half = s.cfg.m_subcarriers / 2;
    double z = squared_distance(uav, s.cfg.tbs_pos);
    Eigen::VectorXd out(half);
    for (int i = 0; i < half; ++i) out[i] = s.ch.sc[half + i].eta_pe_sorted.sum() / z;
    return out;
}

SubcarrierPlan mdd_plan(int m_subcarriers, const SenPeSelection& sel, const std::vector<std::uint8_t>& cd_mask) {
    const int half = m_subcarriers / 2;
    if (static_cast<int>(cd_mask.size()) != half) throw std::invalid_argument("mdd_plan: cd_mask must have M/2 entries");
    SubcarrierPlan plan = SubcarrierPlan::empty(m_subcarriers);
    for (int m = 0; m < half; ++m) (cd_mask[m] ? plan.alpha_cd : plan.alpha_dl)[m] = 1;
    for (int i : sel.sen) plan.alpha_sen[half + i] = 1;
    for (int i : sel.pe) plan.alpha_pe[half + i] = 1;
    for (const Pair& p : sel.pairs) plan.pairs.push_back({half + p.pe, half + p.sen});
    return plan;
}

SubcarrierPlan random_mdd_plan(int m_subcarriers, std::mt19937_64& rng) {
    const int half = m_subcarriers / 2;
    std::bernoulli_distribution coin(0.5);
    std::vector<std::uint8_t> mask(half);
    for (;;) {
        int n_cd = 0;
        for (auto& b : mask) n_cd += (b = coin(rng));
        if (n_cd > 0 && n_cd < half) break;
    }
    std::vector<int> perm(half);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    SenPeSelection sel;
    sel.sen.assign(perm.begin(), perm.begin() + half / 2);
    sel.pe.assign(perm.begin() + half / 2, perm.end());
    std::vector<int> partner = sel.pe;
    std::shuffle(partner.begin(), partner.end(), rng);
    for (std::size_t k = 0; k < sel.sen.size(); ++k) sel.pairs.push_back({partner[k], sel.sen[k]});
    std::sort(sel.pe.begin(), sel.pe.end());
    return mdd_plan(m_subcarriers, sel, mask);
}

SubcarrierPlan tdma_plan(int m_subcarriers) {
    SubcarrierPlan plan;
    plan.alpha_dl.assign(m_subcarriers, 1);
    plan.alpha_cd.assign(m_subcarriers, 1);
    plan.alpha_sen.assign(m_subcarriers, 1);
    plan.alpha_pe.assign(m_subcarriers, 1);
    for (int m = 0; m < m_subcarriers; ++m) plan.pairs.push_back({m, m});
    return plan;
}

L0Value l0_majorizer(double trace, double expansion_trace, double rho) {
    if (!(rho > 0.0)) throw std::invalid_argument("l0_majorizer: rho must be positive");
    double e0 = std::exp(-expansion_trace / rho);
    L0Value v;
    v.upsilon = -std::expm1(-trace / rho);
    v.upsilon_tilde = 1.0 - e0 + e0 * (trace - expansion_trace) / rho;
    return v;
}

SmoothingState SmoothingState::initial(const ScenarioConfig& cfg) {
    return {cfg.p_uav_w() / 10.0, cfg.p_tbs_w() / 10.0};
}

void SmoothingState::advance() {
    rho_dl = std::max(rho_dl / 2.0, floor);
    rho_cd = std::max(rho_cd / 2.0, floor);
}

}  // namespace isac
