#pragma once

#include <random>

#include "isac/metrics.hpp"

namespace isac::test {

// Owns everything a Scene refers to.
struct World {
    ScenarioConfig cfg;
    NodeLayout layout;
    FrameFading fading;
    ChannelSet ch;

    World(const ScenarioConfig& c, std::uint64_t seed, int frame = 1) : cfg(c) {
        auto rng = derive_stream(seed, stream_tag::layout);
        layout = place_nodes(cfg, rng);
        fading = draw_frame_fading(cfg, seed, frame);
        ch = build_channel_set(cfg, fading, frame);
    }

    Scene scene() const { return Scene{cfg, layout, ch}; }
};

inline ScenarioConfig tiny_config(int m = 8, int u = 2, int j = 2) {
    ScenarioConfig c;
    c.m_subcarriers = m;
    c.u_users = u;
    c.j_targets = j;
    return c;
}

// Lower half: DL on even, CD on odd. Upper half: PE first quarter, SEN last, paired in order.
inline SubcarrierPlan interleaved_plan(int M) {
    SubcarrierPlan p = SubcarrierPlan::empty(M);
    for (int m = 0; m < M / 2; ++m) (m % 2 == 0 ? p.alpha_dl : p.alpha_cd)[m] = 1;
    for (int k = 0; k < M / 4; ++k) {
        p.alpha_pe[M / 2 + k] = 1;
        p.alpha_sen[3 * M / 4 + k] = 1;
        p.pairs.push_back({M / 2 + k, 3 * M / 4 + k});
    }
    return p;
}

inline PowerPlan random_powers(const ScenarioConfig& cfg, const SubcarrierPlan& plan, std::uint64_t seed,
                               double scale = 0.05) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    PowerPlan pw = PowerPlan::zeros(cfg.u_users, cfg.j_targets, cfg.m_subcarriers);
    for (int m : plan.dl_set())
        for (int u = 0; u < cfg.u_users; ++u) pw.p_dl(u, m) = scale * u01(rng);
    for (int m : plan.cd_set())
        for (int u = 0; u < cfg.u_users; ++u) pw.p_cd(u, m) = scale * u01(rng);
    for (int m : plan.sen_set())
        for (int j = 0; j < cfg.j_targets; ++j) pw.p_sen(j, m) = scale * u01(rng);
    for (int m : plan.pe_set())
        for (int j = 0; j < cfg.j_targets; ++j) pw.p_pe(j, m) = 1e6 * u01(rng);
    return pw;
}

}  // namespace isac::test
