// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "isac/experiments.hpp"
#include "isac/validation.hpp"

namespace {

using namespace isac;
using Clock = std::chrono::steady_clock;

constexpr int n_seeds = 20;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Line {
    int id;
    std::string name;
    bool pass;
    std::string detail;
};

std::vector<Line> lines;

void report(int id, std::string name, bool pass, std::string detail) {
    std::printf("%s %d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    lines.push_back({id, std::move(name), pass, std::move(detail)});
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
    return buf;
}

// ---- 1-4: exact properties ------------------------------------------------------------------

void property_criteria() {
    const ScenarioConfig cfg = desk_config();
    {
        auto t0 = Clock::now();
        CheckResult r = check_gradient_fidelity(cfg, 100, 11);
        double dt = seconds_since(t0);
        report(1, "gradient fidelity", r.pass && dt < 10.0, r.detail + fmt(", %.2f s", dt));
    }
    {
        auto t0 = Clock::now();
        CheckResult r = check_quadratic_transform(1000, 12);
        double dt = seconds_since(t0);
        report(2, "quadratic transform", r.pass && dt < 1.0, r.detail + fmt(", %.3f s", dt));
    }
    {
        CheckResult r = check_l0_majorization(1000, 13);
        report(3, "smoothed-L0 majorization", r.pass, r.detail);
    }
    {
        std::vector<CheckResult> rs = check_mi_consistency(cfg, 14);
        bool ok = true;
        std::string detail;
        for (const CheckResult& r : rs) {
            ok = ok && r.pass;
            detail += (detail.empty() ? "" : "; ") + r.name + " " + r.detail;
        }
        report(4, "MI consistency", ok, detail);
    }
}

// ---- 5, 9, 10: mission runs -------------------------------------------------------------------

struct Sweep {
    std::vector<MissionTrace> traces;
    int failed = 0;
    double seconds = 0.0;
};

Sweep sweep(const ScenarioConfig& cfg, const std::vector<SchemeId>& schemes) {
    std::vector<MissionJob> jobs;
    for (SchemeId s : schemes) {
        for (int seed = 1; seed <= n_seeds; ++seed) jobs.push_back({s, static_cast<std::uint64_t>(seed)});
    }
    Sweep out;
    auto t0 = Clock::now();
    for (MissionOutcome& o : run_missions(cfg, jobs)) {
        if (o.trace) {
            out.traces.push_back(std::move(*o.trace));
        } else {
            ++out.failed;
        }
    }
    out.seconds = seconds_since(t0);
    return out;
}

double median_p10(const Sweep& s, SchemeId id) {
    std::vector<double> v;
    for (const MissionTrace& t : s.traces) {
        if (t.scheme == id) v.push_back(t.aggregate.rate_p10);
    }
    return v.empty() ? 0.0 : median(v);
}

// Independent re-check of every emitted frame against the budget, cardinality, QoS and velocity rows.
void feasibility_audit(const ScenarioConfig& cfg, const Sweep& s) {
    const int M = cfg.m_subcarriers;
    double worst_power = 0.0, worst_qos = 0.0, worst_step = 0.0;
    int bad_plans = 0, frames = 0;
    for (const MissionTrace& t : s.traces) {
        const NodeLayout layout = mission_layout(cfg, t.seed);
        Vec3 prev = t.initial_position;
        for (const FrameResult& f : t.frames) {
            // Position-free frames are bounded by the previous position; the straight-line benchmark
            // steps exactly one frame's reach.
            const double step = std::hypot(f.uav_pos.x() - prev.x(), f.uav_pos.y() - prev.y());
            worst_step = std::max(worst_step, step - cfg.max_step_m());
            prev = f.uav_pos;
            if (!f.feasible) continue;
            ++frames;
            const ChannelSet ch = mission_channels(cfg, t.seed, f.frame);
            const Scene scene{cfg, layout, ch};
            const bool tdma = t.scheme == SchemeId::tdma;
            const UavPower up = uav_power_used(scene, f.plan, f.powers, f.uav_pos);
            const double used_uav = tdma ? up.peak_phase() : up.total();
            worst_power = std::max(worst_power, used_uav / cfg.p_uav_w() - 1.0);
            worst_power = std::max(worst_power, tbs_power_used(f.plan, f.powers) / cfg.p_tbs_w() - 1.0);
            if (!tdma && !check_mdd_plan(f.plan, M).empty()) ++bad_plans;
            for (double r : f.r_dl_user) worst_qos = std::max(worst_qos, 1.0 - r / cfg.r_dl_min);
            if (t.scheme != SchemeId::no_sens_qos) {
                for (double mi : f.mi_per_target) worst_qos = std::max(worst_qos, 1.0 - mi / cfg.r_mi_min);
            }
        }
    }
    const bool ok = frames > 0 && worst_power <= 1e-6 && bad_plans == 0 && worst_step <= 1e-9 && worst_qos <= 1e-6;
    report(5, "feasibility audit", ok,
           fmt("%.0f frames, budget excess %.2e, QoS shortfall %.2e, step excess %.2e m", frames, worst_power,
               worst_qos, worst_step) +
               ", bad plans " + std::to_string(bad_plans));
}

// ---- 6: SCA monotonicity ------------------------------------------------------------------------

void monotonicity(const Sweep& s) {
    double worst = 0.0;
    int frames = 0;
    for (const MissionTrace& t : s.traces) {
        if (t.scheme != SchemeId::proposed || t.seed != 1) continue;
        for (const std::vector<double>& psi : t.psi_traces) {
            ++frames;
            for (std::size_t k = 1; k < psi.size(); ++k) worst = std::max(worst, psi[k - 1] - psi[k]);
        }
    }
    report(6, "SCA monotonicity", frames == desk_config().n_frames && worst <= 1e-6,
           fmt("%.0f frames, largest decrease %.2e", frames, worst));
}

// ---- 7: convex subproblem against a grid oracle --------------------------------------------------

// Largest ψ-variable value keeping every constraint satisfied with the other variables fixed.
double best_psi(const ConvexProblem& p, Eigen::VectorXd z, int psi) {
    auto ok = [&](double v) {
        z[psi] = v;
        return max_constraint(p, z) <= 0.0;
    };
    double lo = p.lower[psi];
    if (!ok(lo)) return -INFINITY;
    double hi = std::max(1.0, lo + 1.0);
    while (ok(hi) && hi < 1e6) hi *= 2.0;
    for (int i = 0; i < 60; ++i) {
        double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

double objective_at(const ConvexProblem& p, const Eigen::VectorXd& z) {
    double v = p.linear_objective.dot(z);
    for (const SparseFn& fn : p.objective_terms) {
        Eigen::VectorXd local(fn.idx.size());
        for (std::size_t k = 0; k < fn.idx.size(); ++k) local[k] = z[fn.idx[k]];
        double t = 0.0;
        if (!fn.eval(local, t, nullptr, nullptr)) return INFINITY;
        v += t;
    }
    return v;
}

// Upper end of a variable: its box, or the tightest single-variable bound implied by a
// nonnegative linear row.
double effective_upper(const ConvexProblem& p, int i) {
    double hi = p.upper[i];
    for (const LinearRow& row : p.linear) {
        bool nonneg = true;
        double c = 0.0;
        for (std::size_t k = 0; k < row.idx.size(); ++k) {
            nonneg = nonneg && row.coef[k] >= 0.0;
            if (row.idx[k] == i) c += row.coef[k];
        }
        if (nonneg && c > 0.0 && std::isfinite(row.rhs)) hi = std::min(hi, row.rhs / c);
    }
    return hi;
}

double grid_oracle(const ConvexProblem& p, int psi) {
    std::vector<int> dims;
    for (int i = 0; i < p.n; ++i) {
        if (i != psi) dims.push_back(i);
    }
    Eigen::VectorXd lo(p.n), hi(p.n);
    for (int i : dims) {
        lo[i] = p.lower[i];
        hi[i] = effective_upper(p, i);
    }
    const int per_dim = 15;
    double best = INFINITY;
    Eigen::VectorXd best_z = Eigen::VectorXd::Zero(p.n);
    for (int level = 0; level < 14; ++level) {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(p.n);
        std::vector<int> idx(dims.size(), 0);
        for (;;) {
            for (std::size_t d = 0; d < dims.size(); ++d) {
                const int i = dims[d];
                z[i] = lo[i] + (hi[i] - lo[i]) * idx[d] / (per_dim - 1);
            }
            double v = best_psi(p, z, psi);
            if (std::isfinite(v)) {
                z[psi] = v;
                double obj = objective_at(p, z);
                if (obj < best) {
                    best = obj;
                    best_z = z;
                }
            }
            std::size_t d = 0;
            while (d < dims.size() && ++idx[d] == per_dim) idx[d++] = 0;
            if (d == dims.size()) break;
        }
        // Zoom around the incumbent; the feasible set is convex, so the optimum stays inside.
        for (int i : dims) {
            double half = 2.0 * (hi[i] - lo[i]) / (per_dim - 1);
            double c = best_z[i];
            lo[i] = std::max(p.lower[i], c - half);
            hi[i] = std::min(effective_upper(p, i), c + half);
        }
    }
    return best;
}

void solver_vs_oracle() {
    auto t0 = Clock::now();
    ScenarioConfig cfg = desk_config();
    cfg.m_subcarriers = 4;
    cfg.u_users = 1;
    cfg.j_targets = 1;
    const NodeLayout layout = mission_layout(cfg, 3);
    const ChannelSet ch = mission_channels(cfg, 3, 1);
    const Scene scene{cfg, layout, ch};
    const Eigen::Vector2d at(150.0, 150.0);
    const SenPeSelection sel = select_sen_pe(scene, uav_at(cfg, at.x(), at.y()));
    FrameSetup f = make_setup(scene, mdd_plan(4, sel, {0, 1}), FrameKind::mdd, false);
    ScaResult start = restore(f, initial_iterate(f, at.x(), at.y()));
    double err = INFINITY, solver = 0.0, oracle = 0.0;
    if (start.feasible) {
        Subproblem sp = build_constraints(f, start.it, TrustRegion::defaults(cfg), FrameObjective::max_min_rate);
        int psi = -1;
        for (std::size_t i = 0; i < sp.vars.size(); ++i) {
            if (sp.vars[i].kind == Subproblem::Kind::psi) psi = static_cast<int>(i);
        }
        ConvexSolution sol = solve_convex(sp.problem, sp.z0);
        solver = sol.objective;
        oracle = grid_oracle(sp.problem, psi);
        err = std::abs(solver - oracle) / std::max(1.0, std::abs(oracle));
    }
    bool water = false;
    double water_err = INFINITY;
    for (const CheckResult& r : check_convex_toys()) {
        if (r.name == "water-filling") {
            water = r.pass;
            water_err = r.measured;
        }
    }
    double dt = seconds_since(t0);
    report(7, "solver vs oracle", err <= 1e-3 && water && dt < 60.0,
           fmt("subproblem %.6f vs grid %.6f (rel %.2e), water-filling %.2e", solver, oracle, err, water_err) +
               fmt(", %.1f s", dt));
}

// ---- 8: take-off search against a 10 m grid ------------------------------------------------------

// Weak echoes push the first feasible point far from take-off (several hundred metres on seed 1).
ScenarioConfig ela_scenario() {
    ScenarioConfig cfg = desk_config();
    cfg.rcs_m2 = 1e2;
    return cfg;
}

// MI_j with the whole UAV budget on target j's probe, an ideal relay and no interference.
double mi_upper_bound(const Scene& s, const Vec3& uav, int j) {
    const ScenarioConfig& cfg = s.cfg;
    const int M = cfg.m_subcarriers;
    const double z = squared_distance(uav, s.layout.targets[j]);
    std::vector<double> per;
    for (int m = M / 2; m < M; ++m) {
        const SubcarrierChannels& c = s.ch.sc[m];
        per.push_back(std::log2(1.0 + cfg.p_uav_w() * std::norm(c.g_sen(j, j)) * c.omega_sen_bar[j] / (z * z * cfg.n0_w())));
    }
    std::sort(per.rbegin(), per.rend());
    double sum = 0.0;
    for (int k = 0; k < M / 4; ++k) sum += per[k];
    return mdd_prefactors(cfg.n_slots).mi * sum;
}

void takeoff_search() {
    auto t0 = Clock::now();
    const ScenarioConfig cfg = ela_scenario();
    const std::uint64_t seed = 1;
    const NodeLayout layout = mission_layout(cfg, seed);
    const ChannelSet ch = mission_channels(cfg, seed, 1);
    const Scene scene{cfg, layout, ch};
    InitialPosition ip = find_initial_position(scene, {}, {});

    // The returned point must satisfy every row with its integral split.
    FrameSetup f = make_setup(scene, ip.plan, FrameKind::mdd, false);
    f.cd_qos = true;
    const double violation = assess(f, ip.it).violation;
    const Vec3& c0 = cfg.uav_takeoff_pos;
    const double d_ela = std::hypot(ip.it.x - c0.x(), ip.it.y - c0.y());

    struct Point {
        double d, x, y;
    };
    std::vector<Point> grid;
    const double reach = d_ela * 1.05 + 20.0;
    for (double x = c0.x() - reach; x <= c0.x() + reach; x += 10.0) {
        for (double y = c0.y() - reach; y <= c0.y() + reach; y += 10.0) {
            double d = std::hypot(x - c0.x(), y - c0.y());
            if (d <= reach) grid.push_back({d, x, y});
        }
    }
    std::sort(grid.begin(), grid.end(), [](const Point& a, const Point& b) { return a.d < b.d; });
    double d_grid = INFINITY;
    int tested = 0;
    for (const Point& p : grid) {
        const Vec3 uav = uav_at(cfg, p.x, p.y);
        bool possible = true;
        for (int j = 0; j < cfg.j_targets && possible; ++j) possible = mi_upper_bound(scene, uav, j) >= cfg.r_mi_min;
        if (!possible) continue;
        ++tested;
        if (p21_feasible(scene, p.x, p.y)) {
            d_grid = p.d;
            break;
        }
    }
    const double rel = std::abs(d_ela - d_grid) / std::max(d_grid, 1.0);
    const double dt = seconds_since(t0);
    report(8, "take-off search", violation <= 1e-7 && rel <= 0.02 && dt < 300.0,
           fmt("returned %.1f m (violation %.1e), grid %.1f m, rel %.4f", d_ela, violation, d_grid, rel) +
               fmt(", %.0f of %.0f points solved, %.0f s", tested, static_cast<double>(grid.size()), dt));
}

}  // namespace

int main() {
    property_criteria();

    const ScenarioConfig cfg = desk_config();
    const Sweep base = sweep(cfg, all_schemes());
    feasibility_audit(cfg, base);
    monotonicity(base);
    solver_vs_oracle();
    takeoff_search();

    {
        const double p = median_p10(base, SchemeId::proposed);
        const double ns = median_p10(base, SchemeId::no_sens_qos), rs = median_p10(base, SchemeId::ran_sub);
        const double td = median_p10(base, SchemeId::tdma), sl = median_p10(base, SchemeId::s_line);
        const bool ok = base.failed == 0 && ns >= p && p >= rs && p >= td && p >= sl && base.seconds < 900.0;
        report(9, "scheme ordering", ok,
               fmt("no_sens_qos %.3f, proposed %.3f, ran_sub %.3f, tdma %.3f", ns, p, rs, td) +
                   fmt(", s_line %.3f, %.0f s", sl, base.seconds) + ", infeasible missions " +
                   std::to_string(base.failed));
    }
    {
        ScenarioConfig louder = cfg;
        louder.p_uav_dbm += 4.0;
        louder.p_tbs_dbm += 4.0;
        const Sweep up = sweep(louder, {SchemeId::proposed});
        const double before = median_p10(base, SchemeId::proposed), after = median_p10(up, SchemeId::proposed);
        report(10, "power-budget trend", up.failed == 0 && after > before,
               fmt("median 90%%-likely rate %.3f -> %.3f with +4 dB budgets", before, after));
    }

    bool all = true;
    for (const Line& l : lines) all = all && l.pass;
    return all ? 0 : 1;
}
