#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "isac/channel.hpp"

using namespace isac;

namespace {

constexpr double pi = std::numbers::pi;

ScenarioConfig small() {
    ScenarioConfig c;
    c.m_subcarriers = 4;
    c.u_users = 2;
    c.j_targets = 2;
    return c;
}

}  // namespace

TEST_CASE("steering entries are unit-modulus") {
    ScenarioConfig c;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> a(0.0, pi);
    for (int i = 0; i < 20; ++i) {
        SteeringVector s = upa_steering(a(rng), 2.0 * a(rng), i % c.m_subcarriers, c.uav_tx, c);
        for (Eigen::Index k = 0; k < s.entries.size(); ++k) CHECK(std::abs(s.entries[k]) == doctest::Approx(1.0));
    }
}

TEST_CASE("broadside steering is all ones with squared norm R") {
    ScenarioConfig c;
    SteeringVector s = upa_steering(0.0, 0.0, 5, UpaDims{6, 6}, c);
    CHECK(s.entries.size() == 36);
    CHECK((s.entries - Cvec::Ones(36)).norm() == doctest::Approx(0.0));
    CHECK(s.entries.squaredNorm() == doctest::Approx(36.0));
}

TEST_CASE("subcarrier centres are symmetric around the carrier") {
    ScenarioConfig c;
    const int M = c.m_subcarriers;
    for (int m = 0; m < M / 2; ++m) {
        double lo = subcarrier_frequency(c, m), hi = subcarrier_frequency(c, M - 1 - m);
        CHECK((lo + hi) / 2.0 == doctest::Approx(c.fc_hz));
    }
    CHECK(subcarrier_frequency(c, 1) - subcarrier_frequency(c, 0) == doctest::Approx(c.bw_hz / M));
}

TEST_CASE("sensing channel: rank one with fourth-power distance loss") {
    ScenarioConfig c = small();
    FrameFading f = draw_frame_fading(c, 7, 1);
    Vec3 t(0.0, 0.0, 0.0);
    Cmat near = sensing_channel(Vec3(300.0, 0.0, 200.0), t, 1, f, 0, c);
    Vec3 far_pos = Vec3(300.0, 0.0, 200.0) * 2.0;
    Cmat far = sensing_channel(far_pos, t, 1, f, 0, c);
    CHECK(far.squaredNorm() == doctest::Approx(near.squaredNorm() / 16.0).epsilon(1e-12));
    Eigen::JacobiSVD<Cmat> svd(near);
    CHECK(svd.singularValues()[1] <= 1e-12 * svd.singularValues()[0]);
}

TEST_CASE("sensing channel amplitude at 1 km with unit fading") {
    ScenarioConfig c = small();
    FrameFading f = draw_frame_fading(c, 7, 1);
    f.target_gain.setOnes();
    const int m = 0;
    const double lambda = subcarrier_wavelength(c, m);
    // sqrt(G_tx G_rx λ² σ / ((4π)³ d⁴)) with 24 dBi and 20 dBi linearized.
    const double oracle = std::sqrt(std::pow(10.0, 2.4) * std::pow(10.0, 2.0) * lambda * lambda * 100.0 /
                                    (std::pow(4.0 * pi, 3) * 1e12));
    Cmat h = sensing_channel(Vec3(1000.0, 0.0, 0.0), Vec3::Zero(), m, f, 0, c);
    // Every entry carries the same amplitude.
    CHECK(std::abs(h(0, 0)) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(std::abs(h(5, 17)) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(lambda == doctest::Approx(0.06).epsilon(1e-3));
}

TEST_CASE("downlink channel: square-law loss and Ω·R_tx energy") {
    ScenarioConfig c = small();
    FrameFading f = draw_frame_fading(c, 2, 1);
    f.user_gain.setOnes();
    Vec3 user(0.0, 0.0, 0.0), uav(400.0, 300.0, 0.0);
    Cvec h = dl_channel(uav, user, 2, f, 1, c);
    Cvec h2 = dl_channel(uav * 2.0, user, 2, f, 1, c);
    CHECK(h2.squaredNorm() == doctest::Approx(h.squaredNorm() / 4.0).epsilon(1e-12));
    const double lambda = subcarrier_wavelength(c, 2);
    const double omega = db_to_linear(c.g_uav_tx_dbi) * db_to_linear(c.g_ue_rx_dbi) * lambda * lambda /
                         (std::pow(4.0 * pi, 2) * 500.0 * 500.0);
    CHECK(h.squaredNorm() == doctest::Approx(omega * c.uav_tx.count()).epsilon(1e-12));
    f.user_gain.setZero();
    CHECK(dl_channel(uav, user, 2, f, 1, c).norm() == 0.0);
}

TEST_CASE("fronthaul channel limits in the Rician factor") {
    ScenarioConfig c = small();
    FrameFading f = draw_frame_fading(c, 4, 1);
    const Vec3 a(100.0, 0.0, 200.0), b(0.0, 0.0, 10.0);
    c.k_tu = INFINITY;
    Cmat los = fronthaul_channel(a, b, 0, f, c, FronthaulLink::cd);
    Eigen::JacobiSVD<Cmat> svd(los);
    CHECK(svd.singularValues()[1] <= 1e-12 * svd.singularValues()[0]);
    c.k_tu = 0.0;
    Cmat scatter = fronthaul_channel(a, b, 0, f, c, FronthaulLink::cd);
    const double d = (a - b).norm();
    const double lambda = subcarrier_wavelength(c, 0);
    const double amp = std::sqrt(db_to_linear(c.g_tbs_tx_dbi) * db_to_linear(c.g_uav_rx_dbi) * lambda * lambda /
                                 (std::pow(4.0 * pi, 2) * d * d));
    CHECK((scatter - amp * f.psi_cd[0]).norm() <= 1e-12 * scatter.norm());
}

TEST_CASE("fronthaul energy averages to prefactor times array sizes") {
    ScenarioConfig c = small();
    c.m_subcarriers = 4;
    const Vec3 a(50.0, 0.0, 200.0), b(0.0, 0.0, 10.0);
    const double d = (a - b).norm();
    const double lambda = subcarrier_wavelength(c, 0);
    const double prefactor =
        db_to_linear(c.g_tbs_tx_dbi) * db_to_linear(c.g_uav_rx_dbi) * lambda * lambda / (std::pow(4.0 * pi, 2) * d * d);
    FrameFading f = draw_frame_fading(c, 1, 1);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n01(0.0, std::sqrt(0.5));
    const int draws = 10000;
    double mean = 0.0;
    for (int i = 0; i < draws; ++i) {
        f.cd_gain[0] = {n01(rng), n01(rng)};
        for (Eigen::Index k = 0; k < f.psi_cd[0].size(); ++k) f.psi_cd[0].data()[k] = {n01(rng), n01(rng)};
        mean += fronthaul_channel(a, b, 0, f, c, FronthaulLink::cd).squaredNorm() / draws;
    }
    const double expected = prefactor * c.tbs_tx.count() * c.uav_rx.count();
    CHECK(std::abs(mean / expected - 1.0) <= 0.02);
}

TEST_CASE("fading draws are reproducible per frame") {
    ScenarioConfig c = small();
    FrameFading a = draw_frame_fading(c, 9, 3), b = draw_frame_fading(c, 9, 3), d = draw_frame_fading(c, 9, 4);
    CHECK(a.user_gain == b.user_gain);
    CHECK(a.psi_pe[2] == b.psi_pe[2]);
    CHECK(a.target[1].theta == b.target[1].theta);
    CHECK(a.user_gain != d.user_gain);
}

TEST_CASE("channel set summaries agree with the full channels") {
    ScenarioConfig c = small();
    FrameFading f = draw_frame_fading(c, 5, 1);
    ChannelSet ch = build_channel_set(c, f, 1);
    REQUIRE(ch.m() == 4);
    const Vec3 uav(120.0, -40.0, 200.0), target(900.0, 700.0, 0.0), user(850.0, 760.0, 0.0);
    const double zt = (uav - target).squaredNorm(), zu = (uav - user).squaredNorm();
    const int R = c.uav_tx.count() * c.uav_rx.count();
    for (int m = 0; m < 4; ++m) {
        const SubcarrierChannels& s = ch.sc[m];
        for (int j = 0; j < 2; ++j) {
            double full = sensing_channel(uav, target, m, f, j, c).squaredNorm();
            CHECK(full == doctest::Approx(s.omega_sen_bar[j] / (zt * zt) * R).epsilon(1e-10));
            CHECK(s.g_sen(j, j).real() == doctest::Approx(c.uav_rx.count()));
        }
        for (int u = 0; u < 2; ++u) {
            double full = dl_channel(uav, user, m, f, u, c).squaredNorm();
            CHECK(full == doctest::Approx(s.omega_dl_bar[u] / zu * c.uav_tx.count()).epsilon(1e-10));
            CHECK(s.g_dl_abs2(u, u) == doctest::Approx(std::pow(c.uav_tx.count(), 2)));
        }
        CHECK(s.eta_cd.size() == 2);
        CHECK(s.eta_pe_sorted.size() == 2);
        CHECK(s.eta_cd[0] >= s.eta_cd[1]);
    }
}

TEST_CASE("channel dump has one header and a row per link and node") {
    ScenarioConfig c = small();
    FrameFading f = draw_frame_fading(c, 5, 1);
    ChannelSet ch = build_channel_set(c, f, 1);
    std::ostringstream os;
    dump_channel_csv(os, ch, f, true);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "frame,subcarrier,link_type,node_id,re,im,gain");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows >= c.m_subcarriers * (c.u_users + c.j_targets));
}

TEST_CASE("coincident endpoints are rejected") {
    ScenarioConfig c = small();
    FrameFading f = draw_frame_fading(c, 5, 1);
    CHECK_THROWS_AS(sensing_channel(Vec3::Zero(), Vec3::Zero(), 0, f, 0, c), std::invalid_argument);
}
