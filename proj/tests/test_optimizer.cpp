#include <doctest.h>

#include <cmath>
#include <limits>

#include "isac/experiments.hpp"
#include "isac/optimizer.hpp"
#include "isac/validation.hpp"
#include "support.hpp"

using namespace isac;
using namespace isac::test;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Smallest total relay output reaching Σ_k g_jk P_jk >= χ for every target, as an LP.
double min_relay_budget(const Eigen::MatrixXd& g, double chi) {
    const int J = static_cast<int>(g.rows()), K = static_cast<int>(g.cols());
    ConvexProblem p;
    p.n = J * K;
    p.lower = Eigen::VectorXd::Zero(p.n);
    p.upper = Eigen::VectorXd::Constant(p.n, inf);
    p.linear_objective = Eigen::VectorXd::Ones(p.n);
    for (int j = 0; j < J; ++j) {
        LinearRow row;
        for (int k = 0; k < K; ++k) {
            row.idx.push_back(j * K + k);
            row.coef.push_back(-g(j, k));
        }
        row.rhs = -chi;
        p.linear.push_back(row);
    }
    Eigen::VectorXd z0(p.n);
    for (int j = 0; j < J; ++j)
        for (int k = 0; k < K; ++k) z0[j * K + k] = 2.0 * chi / (K * g(j, k));
    ConvexSolution s = solve_convex(p, z0);
    REQUIRE(s.status == SolveStatus::solved);
    return s.objective;
}

// η/Z_TU of every target on every pair.
Eigen::MatrixXd pair_gains(const Scene& s, const SubcarrierPlan& plan, const Vec3& uav) {
    const int J = s.cfg.j_targets, K = static_cast<int>(plan.pairs.size());
    Eigen::MatrixXd g(J, K);
    const double z = squared_distance(uav, s.cfg.tbs_pos);
    for (int k = 0; k < K; ++k) g.col(k) = pe_gains(s, plan.pairs[k], k) / z;
    return g;
}

double relay_total(const Scene& s, const SubcarrierPlan& plan, const PowerPlan& pw, const Vec3& uav) {
    return uav_power_used(s, plan, pw, uav).pe;
}

}  // namespace

TEST_CASE("a single target takes the whole relay budget") {
    World w(tiny_config(8, 2, 1), 3);
    Scene s = w.scene();
    SubcarrierPlan plan = interleaved_plan(8);
    PowerPlan base = random_powers(w.cfg, plan, 1);
    base.p_pe.setZero();
    const Vec3 uav = uav_at(w.cfg, 9000.0, 9000.0);
    PeInit pe = init_pe_power(s, plan, base, uav, 0.4);
    REQUIRE(pe.feasible);
    PowerPlan pw = base;
    pw.p_pe = pe.p_pe;
    CHECK(relay_total(s, plan, pw, uav) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("targets with identical geometry get equal fairness values") {
    World w(tiny_config(8, 2, 2), 5);
    w.layout.targets[1] = w.layout.targets[0];
    w.fading.target[1] = w.fading.target[0];
    w.fading.target_gain.row(1) = w.fading.target_gain.row(0);
    w.ch = build_channel_set(w.cfg, w.fading, 1);
    for (auto& sc : w.ch.sc) sc.eta_pe_sorted.setConstant(sc.eta_pe_sorted[0]);
    Scene s = w.scene();
    SubcarrierPlan plan = interleaved_plan(8);
    PowerPlan base = random_powers(w.cfg, plan, 2);
    base.p_pe.setZero();
    base.p_sen.col(plan.pairs[0].sen).setConstant(0.1);
    base.p_sen.col(plan.pairs[1].sen).setConstant(0.1);
    const Vec3 uav = uav_at(w.cfg, 9200.0, 9100.0);
    PeInit pe = init_pe_power(s, plan, base, uav, 0.3);
    REQUIRE(pe.feasible);
    PowerPlan pw = base;
    pw.p_pe = pe.p_pe;
    const Eigen::MatrixXd g = pair_gains(s, plan, uav);
    Eigen::Vector2d fair = Eigen::Vector2d::Zero();
    for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 2; ++j) fair[j] += g(j, k) * relay_output_power(s, pw, uav, plan.pairs[k], j);
    CHECK(fair[0] == doctest::Approx(fair[1]).epsilon(1e-12));
    CHECK(fair[0] == doctest::Approx(pe.chi).epsilon(1e-12));
}

TEST_CASE("max-min relay initialization matches a bisection oracle") {
    for (std::uint64_t seed : {7u, 8u, 9u}) {
        World w(tiny_config(16, 2, 2), seed);
        Scene s = w.scene();
        SubcarrierPlan plan = interleaved_plan(16);
        PowerPlan base = random_powers(w.cfg, plan, seed);
        base.p_pe.setZero();
        const Vec3 uav = uav_at(w.cfg, 8000.0, 9500.0);
        const double budget = 0.25;
        PeInit pe = init_pe_power(s, plan, base, uav, budget);
        REQUIRE(pe.feasible);

        const Eigen::MatrixXd g = pair_gains(s, plan, uav);
        // The LP runs on unit-scale gains; χ scales back linearly.
        const double unit = g.maxCoeff();
        double lo = 0.0, hi = budget;
        for (int i = 0; i < 60; ++i) {
            double mid = 0.5 * (lo + hi);
            (min_relay_budget(g / unit, mid) <= budget ? lo : hi) = mid;
        }
        CHECK(std::abs(pe.chi - lo * unit) <= 1e-6 * lo * unit);

        // Tightness: the weakest target sits exactly at χ and the budget is spent.
        PowerPlan pw = base;
        pw.p_pe = pe.p_pe;
        double weakest = inf;
        for (int j = 0; j < 2; ++j) {
            double v = 0.0;
            for (int k = 0; k < static_cast<int>(plan.pairs.size()); ++k)
                v += g(j, k) * relay_output_power(s, pw, uav, plan.pairs[k], j);
            weakest = std::min(weakest, v);
        }
        CHECK(weakest == doctest::Approx(pe.chi).epsilon(1e-9));
        CHECK(relay_total(s, plan, pw, uav) == doctest::Approx(budget).epsilon(1e-9));
    }
}

TEST_CASE("no relay budget leaves the initialization infeasible") {
    World w(tiny_config(8, 2, 2), 1);
    Scene s = w.scene();
    SubcarrierPlan plan = interleaved_plan(8);
    PeInit pe = init_pe_power(s, plan, PowerPlan::zeros(2, 2, 8), uav_at(w.cfg, 0.0, 0.0), 0.0);
    CHECK(!pe.feasible);
    CHECK(pe.p_pe.isZero());
}

TEST_CASE("ELA thresholds are validated") {
    ElaConfig e;
    CHECK_NOTHROW(e.validate());
    e.epsilon_prime = 2.0 * e.epsilon;
    CHECK_THROWS(e.validate());
}

TEST_CASE("take-off search returns a feasible point, closer under relaxed QoS") {
    ScenarioConfig cfg = desk_config();
    const std::uint64_t seed = 2;
    const NodeLayout layout = mission_layout(cfg, seed);
    const ChannelSet ch = mission_channels(cfg, seed, 1);
    const Scene scene{cfg, layout, ch};
    InitialPosition ip = find_initial_position(scene);
    FrameSetup f = make_setup(scene, ip.plan, FrameKind::mdd, false);
    f.cd_qos = true;
    CHECK(assess(f, ip.it).violation <= 1e-7);
    CHECK(check_mdd_plan(ip.plan, cfg.m_subcarriers).empty());
    const Vec3& c0 = cfg.uav_takeoff_pos;
    const double strict = std::hypot(ip.it.x - c0.x(), ip.it.y - c0.y());
    // Outer-loop positions approach the take-off point.
    for (std::size_t i = 1; i < ip.qt_path.size(); ++i) {
        CHECK((ip.qt_path[i] - c0.head<2>()).norm() <= (ip.qt_path[i - 1] - c0.head<2>()).norm() + 1.0);
    }

    ScenarioConfig loose = cfg;
    loose.r_mi_min = 0.0;
    loose.r_dl_min = 0.0;
    const Scene loose_scene{loose, layout, ch};
    InitialPosition lp = find_initial_position(loose_scene);
    const double relaxed = std::hypot(lp.it.x - c0.x(), lp.it.y - c0.y());
    CHECK(relaxed <= strict + 1.0);
}

TEST_CASE("a frame keeps its step within reach and never loses ground between iterates") {
    ScenarioConfig cfg = desk_config();
    const std::uint64_t seed = 3;
    const NodeLayout layout = mission_layout(cfg, seed);
    const ChannelSet ch = mission_channels(cfg, seed, 2);
    const Scene scene{cfg, layout, ch};
    const Eigen::Vector2d start(700.0, 700.0);
    FrameOptions fo;
    fo.frame = 2;
    fo.start = start;
    SenPeSelection sel = select_sen_pe(scene, uav_at(cfg, start.x(), start.y()));
    fo.plan = mdd_plan(cfg.m_subcarriers, sel, std::vector<std::uint8_t>(cfg.m_subcarriers / 2, 0));
    FrameOutcome out = optimize_frame(scene, fo);
    const Eigen::Vector2d end = out.result.uav_pos.head<2>();
    CHECK((end - start).norm() <= cfg.max_step_m() * (1.0 + 1e-9));
    for (std::size_t i = 1; i < out.psi_trace.size(); ++i) CHECK(out.psi_trace[i] >= out.psi_trace[i - 1] - 1e-6);
    if (out.result.feasible) {
        CHECK(check_mdd_plan(out.result.plan, cfg.m_subcarriers).empty());
        CHECK(out.result.r_e2e >= out.psi_trace.back() - 1e-6);
        for (double r : out.result.r_dl_user) CHECK(r >= cfg.r_dl_min * (1.0 - 1e-6));
        for (double mi : out.result.mi_per_target) CHECK(mi >= cfg.r_mi_min * (1.0 - 1e-6));
    }
}
