#include "isac/validation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "isac/convex.hpp"
#include "isac/experiments.hpp"
#include "isac/surrogates.hpp"

namespace isac {

namespace {

std::string describe(double worst, double tol) {
    std::ostringstream os;
    os.precision(3);
    os << "worst " << std::scientific << worst << " (tol " << tol << ")";
    return os.str();
}

CheckResult verdict(std::string name, double worst, double tol) {
    return {std::move(name), worst <= tol, worst, tol, describe(worst, tol)};
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

}  // namespace

ScenarioConfig desk_config() {
    ScenarioConfig cfg;
    cfg.m_subcarriers = 8;
    cfg.u_users = 2;
    cfg.j_targets = 2;
    cfg.n_frames = 20;
    cfg.area_center = {1400.0, 1400.0, 0.0};
    cfg.uav_takeoff_pos = {10.0, 0.0, 200.0};
    // Noise-limited links with sensing margin, so per-frame fading rarely empties the feasible set.
    cfg.n0_dbm = -57.0;
    cfg.r_dl_min = 2.0;
    cfg.rcs_m2 = 1e4;
    // A weak fronthaul keeps the end-to-end rate CD-limited, where repositioning pays off.
    cfg.g_tbs_tx_dbi = 0.0;
    return cfg;
}

CheckResult check_gradient_fidelity(const ScenarioConfig& cfg, int points, std::uint64_t seed) {
    const int J = cfg.j_targets;
    NodeLayout layout = mission_layout(cfg, seed);
    std::mt19937_64 rng = derive_stream(seed, 101);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double P = cfg.p_uav_w();
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
        ChannelSet ch = mission_channels(cfg, seed, 1 + i % 5);
        Scene scene{cfg, layout, ch};
        const int half = cfg.m_subcarriers / 2;
        Pair pair{half + static_cast<int>(u01(rng) * half) % half, half + static_cast<int>(u01(rng) * half) % half};
        const int k = static_cast<int>(u01(rng) * J) % J;
        MiInputs in = mi_inputs(scene, pair, k, static_cast<int>(u01(rng) * J) % J);

        MiPoint q;
        const double r = cfg.area_radius_m * 3.0 * std::sqrt(u01(rng));
        const double a = 2.0 * 3.141592653589793 * u01(rng);
        q.x = cfg.area_center.x() + r * std::cos(a);
        q.y = cfg.area_center.y() + r * std::sin(a);
        q.p_sen = Eigen::VectorXd(J);
        for (int t = 0; t < J; ++t) q.p_sen[t] = (0.05 + 0.95 * u01(rng)) * P / J;
        // Relay coefficient scaled so its output stays within the UAV budget.
        MiPoint unit = q;
        unit.p_pe = 1.0;
        q.p_pe = (0.05 + 0.95 * u01(rng)) * P / mi_evaluate(in, unit).p_mi;

        MiValue base = mi_evaluate(in, q);
        for (int d = 0; d < J + 3; ++d) {
            double h;
            auto shifted = [&](double delta) {
                MiPoint p = q;
                if (d == 0) p.p_pe += delta;
                else if (d <= J) p.p_sen[d - 1] += delta;
                else if (d == J + 1) p.x += delta;
                else p.y += delta;
                return mi_evaluate(in, p);
            };
            if (d == 0) h = 1e-4 * q.p_pe;
            else if (d <= J) h = 1e-4 * q.p_sen[d - 1];
            else h = 1e-2;
            MiValue plus = shifted(h), minus = shifted(-h);
            const double fd[3] = {(plus.s - minus.s) / (2 * h), (plus.n - minus.n) / (2 * h),
                                  (plus.p_mi - minus.p_mi) / (2 * h)};
            const double an[3] = {base.ds[d], base.dn[d], base.dp[d]};
            const double val[3] = {base.s, base.n, base.p_mi};
            // A partial that is negligible against value/h is compared on that scale instead.
            for (int c = 0; c < 3; ++c) {
                double scale = std::max({std::abs(an[c]), std::abs(fd[c]), 1e-9 * std::abs(val[c]) / h});
                worst = std::max(worst, std::abs(fd[c] - an[c]) / scale);
            }
        }
    }
    return verdict("gradient fidelity", worst, 1e-5);
}

CheckResult check_quadratic_transform(int draws, std::uint64_t seed) {
    std::mt19937_64 rng = derive_stream(seed, 102);
    double worst_tight = 0.0, worst_bound = 0.0;
    for (int i = 0; i < draws; ++i) {
        double s = log_uniform(rng, 1e-12, 1e3);
        double n = log_uniform(rng, 1e-12, 1e3);
        double exact = std::log2(1.0 + s / n);
        double v = quad_transform_v(s, n);
        worst_tight = std::max(worst_tight, std::abs(surrogate_log_rate(s, n, v) - exact));
        double vr = v * log_uniform(rng, 1e-3, 1.999);
        double sur = surrogate_log_rate(s, n, vr);
        worst_bound = std::max(worst_bound, sur - exact);
    }
    // Upper-bound violations beyond round-off count as errors.
    double worst = std::max(worst_tight, std::max(0.0, worst_bound - 1e-12));
    return verdict("quadratic transform", worst, 1e-9);
}

CheckResult check_l0_majorization(int draws, std::uint64_t seed) {
    std::mt19937_64 rng = derive_stream(seed, 103);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    double worst_gap = 0.0, worst_tight = 0.0;
    for (int i = 0; i < draws; ++i) {
        double rho = log_uniform(rng, 1e-6, 10.0);
        double t = u(rng) * rho, t0 = u(rng) * rho;
        L0Value at = l0_majorizer(t, t0, rho);
        worst_gap = std::max(worst_gap, at.upsilon - at.upsilon_tilde);
        L0Value same = l0_majorizer(t0, t0, rho);
        worst_tight = std::max(worst_tight, std::abs(same.upsilon - same.upsilon_tilde));
    }
    double worst = std::max(worst_tight, std::max(0.0, worst_gap - 1e-15));
    return verdict("smoothed-L0 majorization", worst, 1e-12);
}

std::vector<CheckResult> check_mi_consistency(const ScenarioConfig& base, std::uint64_t seed) {
    std::vector<CheckResult> out;
    for (int J : {1, 2}) {
        ScenarioConfig cfg = base;
        cfg.j_targets = J;
        NodeLayout layout = mission_layout(cfg, seed);
        double worst = 0.0;
        std::mt19937_64 rng = derive_stream(seed, 104);
        std::uniform_real_distribution<double> u01(0.05, 1.0);
        for (int frame = 1; frame <= 5; ++frame) {
            ChannelSet ch = mission_channels(cfg, seed, frame);
            if (J > 1) {
                for (auto& sc : ch.sc) {
                    Cmat d = sc.g_sen.diagonal().asDiagonal();
                    sc.g_sen = d;
                }
            }
            Scene scene{cfg, layout, ch};
            SubcarrierPlan plan = tdma_plan(cfg.m_subcarriers);
            PowerPlan pw = PowerPlan::zeros(cfg.u_users, J, cfg.m_subcarriers);
            Vec3 uav = uav_at(cfg, cfg.area_center.x() + 300.0 * u01(rng), cfg.area_center.y() - 200.0 * u01(rng));
            for (int m = 0; m < cfg.m_subcarriers; ++m) {
                for (int j = 0; j < J; ++j) {
                    pw.p_sen(j, m) = u01(rng) * cfg.p_uav_w() / J;
                    pw.p_pe(j, m) = u01(rng) * 1e6;
                }
            }
            for (int k = 0; k < static_cast<int>(plan.pairs.size()); ++k) {
                double sum = 0.0;
                for (int j = 0; j < J; ++j) sum += per_target_mi(scene, plan, pw, uav, k, j, 1.0);
                worst = std::max(worst, std::abs(sensing_mi_logdet(scene, plan, pw, uav, k, 1.0) - sum));
            }
        }
        out.push_back(verdict(J == 1 ? "MI consistency J=1" : "MI consistency J=2 orthogonal", worst,
                              J == 1 ? 1e-9 : 1e-6));
    }
    return out;
}

std::vector<CheckResult> check_convex_toys() {
    std::vector<CheckResult> out;
    {
        // max log(1 + p), 0 <= p <= 1
        ConvexProblem pr;
        pr.n = 1;
        pr.lower = Eigen::VectorXd::Zero(1);
        pr.upper = Eigen::VectorXd::Ones(1);
        pr.linear_objective = Eigen::VectorXd::Zero(1);
        pr.objective_terms.push_back({{0}, [](const Eigen::VectorXd& z, double& v, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
                                          if (!(z[0] > -1.0)) return false;
                                          v = -std::log1p(z[0]);
                                          if (g) *g = Eigen::VectorXd::Constant(1, -1.0 / (1.0 + z[0]));
                                          if (h) *h = Eigen::MatrixXd::Constant(1, 1, 1.0 / std::pow(1.0 + z[0], 2));
                                          return true;
                                      }});
        ConvexSolution s = solve_convex(pr, Eigen::VectorXd::Constant(1, 0.5));
        out.push_back(verdict("box monotone", std::abs(s.z[0] - 1.0), 1e-6));
    }
    {
        const double g1 = 2.0, g2 = 1.0, P = 1.0;
        ConvexProblem pr;
        pr.n = 2;
        pr.lower = Eigen::VectorXd::Zero(2);
        pr.upper = Eigen::VectorXd::Constant(2, INFINITY);
        pr.linear_objective = Eigen::VectorXd::Zero(2);
        pr.objective_terms.push_back({{0, 1}, [g1, g2](const Eigen::VectorXd& z, double& v, Eigen::VectorXd* g,
                                                      Eigen::MatrixXd* h) {
                                          double a = 1.0 + g1 * z[0], b = 1.0 + g2 * z[1];
                                          if (!(a > 0.0 && b > 0.0)) return false;
                                          v = -std::log(a) - std::log(b);
                                          if (g) *g = Eigen::Vector2d(-g1 / a, -g2 / b);
                                          if (h) *h = Eigen::Vector2d(g1 * g1 / (a * a), g2 * g2 / (b * b)).asDiagonal();
                                          return true;
                                      }});
        pr.linear.push_back({{0, 1}, {1.0, 1.0}, P});
        ConvexSolution s = solve_convex(pr, Eigen::Vector2d(0.1, 0.1));
        // Water level with both channels active: p_i = μ - 1/g_i, Σ p_i = P.
        double mu = (P + 1.0 / g1 + 1.0 / g2) / 2.0;
        Eigen::Vector2d ref(std::max(0.0, mu - 1.0 / g1), std::max(0.0, mu - 1.0 / g2));
        if (ref[1] == 0.0) ref = {P, 0.0};
        out.push_back(verdict("water-filling", (s.z - ref).cwiseAbs().maxCoeff(), 1e-5));
    }
    return out;
}

std::vector<CheckResult> run_property_suite() {
    ScenarioConfig cfg = desk_config();
    std::vector<CheckResult> out;
    out.push_back(check_gradient_fidelity(cfg, 100, 11));
    out.push_back(check_quadratic_transform(1000, 12));
    out.push_back(check_l0_majorization(1000, 13));
    for (auto& r : check_mi_consistency(cfg, 14)) out.push_back(r);
    for (auto& r : check_convex_toys()) out.push_back(r);
    return out;
}

}  // namespace isac
