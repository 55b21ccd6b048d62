#include "isac/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace isac {

namespace {

constexpr double ln2 = std::numbers::ln2;
constexpr double inf = std::numeric_limits<double>::infinity();

enum class Accept { improve, any_feasible, reduce_violation };

struct Step {
    bool accepted = false;
    Iterate it;
    Assessment a;
    double kkt = 0.0;
};

Iterate blend(const Iterate& a, const Iterate& b, double t) {
    Iterate o = a;
    o.pw.p_dl += t * (b.pw.p_dl - a.pw.p_dl);
    o.pw.p_cd += t * (b.pw.p_cd - a.pw.p_cd);
    o.pw.p_sen += t * (b.pw.p_sen - a.pw.p_sen);
    o.pw.p_pe += t * (b.pw.p_pe - a.pw.p_pe);
    o.x += t * (b.x - a.x);
    o.y += t * (b.y - a.y);
    return o;
}

bool acceptable(const Assessment& now, const Assessment& before, FrameObjective obj, Accept rule, double tol) {
    switch (rule) {
        case Accept::reduce_violation: return now.violation <= tol || now.violation < before.violation * (1.0 - 1e-9);
        case Accept::any_feasible: return now.violation <= tol;
        case Accept::improve:
            if (now.violation > tol) return false;
            if (obj == FrameObjective::max_min_rate) return now.psi >= before.psi;
            if (obj == FrameObjective::min_distance) return now.distance2 <= before.distance2;
            return true;
    }
    return false;
}

// Solves the convexified problem at `anchor` and backtracks along the segment to the candidate;
// the trust region halves whenever no point of the segment is acceptable.
Step sca_step(const FrameSetup& f, const Iterate& anchor, const Assessment& a0, TrustRegion tr, FrameObjective obj,
              Accept rule, const ScaOptions& opt) {
    for (int r = 0; r <= opt.max_retries; ++r) {
        Subproblem sp = build_constraints(f, anchor, tr, obj);
        ConvexSolution sol = solve_convex(sp.problem, sp.z0, opt.solver);
        if (sol.status != SolveStatus::infeasible) {
            Iterate cand = sp.decode(sol.z);
            for (double t = 1.0; t >= 1.0 / 16.0; t *= 0.5) {
                Iterate trial = blend(anchor, cand, t);
                Assessment at = assess(f, trial);
                if (acceptable(at, a0, obj, rule, opt.feas_tol)) return {true, trial, at, sol.kkt_residual};
            }
        }
        tr.theta *= 0.5;
    }
    return {};
}

double planar_distance(const Iterate& a, const Iterate& b) { return std::hypot(a.x - b.x, a.y - b.y); }

TraceRow trace_row(int k, const Assessment& a, double kkt) {
    return {k, a.psi, a.metrics.r_dl, a.metrics.r_cd, a.metrics.mi_total(), kkt};
}

bool decided(const Assessment& a) {
    for (std::size_t m = 0; m < a.upsilon_dl.size(); ++m) {
        if (std::max(a.upsilon_dl[m], a.upsilon_cd[m]) < 0.999) return false;
    }
    return true;
}

SubcarrierPlan fixed_plan(const SubcarrierPlan& relaxed, const std::vector<std::uint8_t>& cd_mask) {
    SubcarrierPlan out = relaxed;
    for (std::size_t m = 0; m < cd_mask.size(); ++m) {
        out.alpha_cd[m] = cd_mask[m];
        out.alpha_dl[m] = cd_mask[m] ? 0 : 1;
    }
    return out;
}

std::vector<std::uint8_t> mask_bits(unsigned bits, int half) {
    std::vector<std::uint8_t> cd(half);
    for (int m = 0; m < half; ++m) cd[m] = (bits >> m) & 1u;
    return cd;
}

// The rounded split first; on small bands every other split with both sides non-empty follows,
// ordered by agreement with the smoothed-L0 indicators.
std::vector<std::vector<std::uint8_t>> split_candidates(const FrameSetup& f, const Assessment& a) {
    const int half = f.scene.cfg.m_subcarriers / 2;
    std::vector<std::vector<std::uint8_t>> out{round_split(f, a)};
    if (half > 6) return out;
    std::vector<std::pair<double, unsigned>> ranked;
    for (unsigned bits = 1; bits + 1 < (1u << half); ++bits) {
        std::vector<std::uint8_t> cd = mask_bits(bits, half);
        if (cd == out.front()) continue;
        double score = 0.0;
        for (int m = 0; m < half; ++m) score += (cd[m] ? 1.0 : -1.0) * (a.upsilon_cd[m] - a.upsilon_dl[m]);
        ranked.push_back({-score, bits});
    }
    std::sort(ranked.begin(), ranked.end());
    for (const auto& [score, bits] : ranked) out.push_back(mask_bits(bits, half));
    return out;
}

SubcarrierPlan sen_pe_plan(const Scene& scene, const SenPeSelection& sel) {
    const int M = scene.cfg.m_subcarriers;
    return relaxed_plan(mdd_plan(M, sel, std::vector<std::uint8_t>(M / 2, 0)), M);
}

FrameSetup p21_setup(const Scene& scene, const SubcarrierPlan& plan) {
    FrameSetup f = make_setup(scene, plan, FrameKind::mdd, true);
    f.cd_qos = true;
    return f;
}

}  // namespace

void ElaConfig::validate() const {
    if (!(l_step_m > 0.0)) throw std::invalid_argument("l_step_m: must be positive");
    if (!(epsilon > 0.0) || !(epsilon_prime > 0.0)) throw std::invalid_argument("epsilon: thresholds must be positive");
    if (epsilon_prime > epsilon) throw std::invalid_argument("epsilon_prime: must not exceed epsilon");
    if (max_outer < 1 || max_inner < 1) throw std::invalid_argument("max_outer: iteration caps must be positive");
}

FrameSetup make_setup(const Scene& scene, const SubcarrierPlan& plan, FrameKind kind, bool relaxed) {
    const ScenarioConfig& cfg = scene.cfg;
    FrameSetup f(scene);
    f.plan = relaxed ? relaxed_plan(plan, cfg.m_subcarriers) : plan;
    f.split = relaxed ? SplitMode::relaxed : SplitMode::fixed;
    f.kind = kind;
    f.pre = kind == FrameKind::mdd ? mdd_prefactors(cfg.n_slots) : tdma_prefactors(cfg.tdma, cfg.n_slots);
    f.takeoff = cfg.uav_takeoff_pos;
    f.rho = SmoothingState::initial(cfg);
    return f;
}

PeInit init_pe_power(const Scene& scene, const SubcarrierPlan& plan, const PowerPlan& base, const Vec3& uav,
                     double budget) {
    const int J = scene.cfg.j_targets;
    PeInit out;
    out.p_pe = Eigen::MatrixXd::Zero(J, scene.cfg.m_subcarriers);
    if (!(budget > 0.0) || plan.pairs.empty()) return out;
    const double z_tu = squared_distance(uav, scene.cfg.tbs_pos);
    double inv_sum = 0.0;
    std::vector<int> best(J, 0);
    std::vector<double> best_eta(J, 0.0);
    for (int k = 0; k < static_cast<int>(plan.pairs.size()); ++k) {
        Eigen::VectorXd eta = pe_gains(scene, plan.pairs[k], k) / z_tu;
        for (int j = 0; j < J; ++j) {
            if (eta[j] > best_eta[j]) {
                best_eta[j] = eta[j];
                best[j] = k;
            }
        }
    }
    for (int j = 0; j < J; ++j) {
        if (!(best_eta[j] > 0.0)) return out;
        inv_sum += 1.0 / best_eta[j];
    }
    out.chi = budget / inv_sum;
    PowerPlan unit = base;
    for (int j = 0; j < J; ++j) {
        const Pair& pair = plan.pairs[best[j]];
        unit.p_pe(j, pair.pe) = 1.0;
        double e = relay_output_power(scene, unit, uav, pair, j);
        if (!(e > 0.0)) return out;
        out.p_pe(j, pair.pe) = out.chi / best_eta[j] / e;
    }
    out.feasible = true;
    return out;
}

Iterate initial_iterate(const FrameSetup& f, double x, double y) {
    const ScenarioConfig& cfg = f.scene.cfg;
    const int U = cfg.u_users, J = cfg.j_targets, M = cfg.m_subcarriers;
    const double P = cfg.p_uav_w(), T = cfg.p_tbs_w();
    const bool tdma = f.kind == FrameKind::tdma;
    const bool relaxed = f.split == SplitMode::relaxed;
    Iterate it{PowerPlan::zeros(U, J, M), x, y};
    const Vec3 pos = uav_at(cfg, x, y);

    const std::vector<int> dl = f.plan.dl_set(), cd = f.plan.cd_set(), sen = f.plan.sen_set();
    const double dl_budget = (tdma || !f.sensing) ? P : P / 3.0;
    for (int m : dl) {
        double t = dl_budget / dl.size();
        if (relaxed) t = std::min(t, 0.98 * f.rho.rho_dl * ln2);
        it.pw.p_dl.col(m).setConstant(t / U);
    }
    for (int m : cd) {
        double t = T / cd.size();
        if (relaxed) t = std::min(t, 0.98 * f.rho.rho_cd * ln2);
        it.pw.p_cd.col(m).setConstant(t / U);
    }
    if (!f.sensing || sen.empty()) return it;

    const double sen_budget = tdma ? P : P / 3.0;
    for (int m : sen) it.pw.p_sen.col(m).setConstant(sen_budget / (J * static_cast<double>(sen.size())));
    UavPower used = uav_power_used(f.scene, f.plan, it.pw, pos);
    const double residual = tdma ? P : P - used.dl - used.sen;
    if (!(residual > 0.0)) return it;

    PeInit pe = init_pe_power(f.scene, f.plan, it.pw, pos, 0.99 * residual);
    it.pw.p_pe = pe.p_pe;
    // Keeps every relay coefficient positive so the linearizations see all pairs.
    const double spread = 0.01 * residual / (J * static_cast<double>(f.plan.pairs.size()));
    for (const Pair& pair : f.plan.pairs) {
        for (int j = 0; j < J; ++j) {
            PowerPlan unit = it.pw;
            unit.p_pe(j, pair.pe) = 1.0;
            double e = relay_output_power(f.scene, unit, pos, pair, j);
            if (e > 0.0) it.pw.p_pe(j, pair.pe) += spread / e;
        }
    }
    return it;
}

ScaResult restore(const FrameSetup& f, const Iterate& start, const ScaOptions& opt) {
    ScaResult res;
    res.it = start;
    res.a = assess(f, start);
    res.feasible = res.a.violation <= opt.feas_tol;
    int stagnant = 0;
    for (int k = 0; k < opt.restore_iters && !res.feasible; ++k) {
        TrustRegion tr = TrustRegion::defaults(f.scene.cfg);
        Step st = sca_step(f, res.it, res.a, tr, FrameObjective::restoration, Accept::reduce_violation, opt);
        if (!st.accepted) break;
        double before = res.a.violation;
        res.it = st.it;
        res.a = st.a;
        res.kkt = st.kkt;
        ++res.iters;
        res.feasible = res.a.violation <= opt.feas_tol;
        stagnant = res.a.violation > 0.95 * before ? stagnant + 1 : 0;
        if (stagnant >= 3) break;
    }
    return res;
}

ScaResult run_sca(const FrameSetup& f, const Iterate& start, FrameObjective obj, const ScaOptions& opt) {
    ScaResult res;
    res.it = start;
    res.a = assess(f, start);
    res.feasible = res.a.violation <= opt.feas_tol;
    if (!res.feasible) return res;
    res.trace.push_back(trace_row(0, res.a, 0.0));
    res.psi_trace.push_back(res.a.psi);
    for (int k = 0; k < opt.max_iters; ++k) {
        TrustRegion tr = TrustRegion::defaults(f.scene.cfg);
        tr.theta = TrustRegion::schedule(k);
        Step st = sca_step(f, res.it, res.a, tr, obj, Accept::improve, opt);
        if (!st.accepted) break;
        double gain = 0.0;
        if (obj == FrameObjective::max_min_rate) {
            gain = (st.a.psi - res.a.psi) / std::max(std::abs(res.a.psi), 1e-12);
        } else {
            gain = (res.a.distance2 - st.a.distance2) / std::max(res.a.distance2, 1.0);
        }
        res.it = st.it;
        res.a = st.a;
        res.kkt = st.kkt;
        ++res.iters;
        res.trace.push_back(trace_row(res.iters, res.a, st.kkt));
        res.psi_trace.push_back(res.a.psi);
        if (gain < opt.rel_tol) break;
    }
    return res;
}

std::vector<std::uint8_t> round_split(const FrameSetup& f, const Assessment& a) {
    const int half = f.scene.cfg.m_subcarriers / 2;
    std::vector<std::uint8_t> cd(half, 0);
    int n_cd = 0;
    for (int m = 0; m < half; ++m) {
        cd[m] = a.upsilon_cd[m] >= a.upsilon_dl[m] ? 1 : 0;
        n_cd += cd[m];
    }
    if (n_cd == 0 || n_cd == half) {
        // Flip the subcarrier that leans most towards the empty side.
        const std::vector<double>& lean = n_cd == 0 ? a.upsilon_cd : a.upsilon_dl;
        int best = 0;
        for (int m = 1; m < half; ++m) {
            if (lean[m] > lean[best]) best = m;
        }
        cd[best] = n_cd == 0 ? 1 : 0;
    }
    return cd;
}

JointResult solve_with_split(const FrameSetup& relaxed, const Iterate& start, FrameObjective obj,
                             const ScaOptions& opt) {
    JointResult out;
    out.plan = relaxed.plan;
    FrameSetup fr = relaxed;
    ScaResult r = restore(fr, start, opt);
    if (!r.feasible) {
        out.sca = r;
        return out;
    }
    Iterate it = r.it;
    Assessment a = r.a;
    for (int k = 0; k < opt.stage1_cap && !decided(a); ++k) {
        TrustRegion tr = TrustRegion::defaults(fr.scene.cfg);
        tr.theta = TrustRegion::schedule(k);
        FrameSetup tighter = fr;
        tighter.rho.advance();
        Assessment at = assess(tighter, it);
        Step st = sca_step(tighter, it, at, tr, obj, Accept::any_feasible, opt);
        if (st.accepted) {
            fr.rho = tighter.rho;
        } else {
            st = sca_step(fr, it, a, tr, obj, Accept::any_feasible, opt);
            if (!st.accepted) break;
        }
        it = st.it;
        a = st.a;
    }

    FrameSetup ff = fr;
    ff.split = SplitMode::fixed;
    ScaResult fixed;
    for (const std::vector<std::uint8_t>& cd : split_candidates(fr, a)) {
        Iterate trial = it;
        for (std::size_t m = 0; m < cd.size(); ++m) {
            if (cd[m]) {
                trial.pw.p_dl.col(m).setZero();
            } else {
                trial.pw.p_cd.col(m).setZero();
            }
        }
        ff.plan = fixed_plan(fr.plan, cd);
        out.plan = ff.plan;
        fixed = restore(ff, trial, opt);
        if (fixed.feasible) break;
    }
    if (!fixed.feasible) {
        out.sca = fixed;
        return out;
    }
    out.sca = run_sca(ff, fixed.it, obj, opt);
    if (obj != FrameObjective::max_min_rate) return out;

    // Local search over the split: hand one subcarrier to the weaker link while ψ improves.
    std::vector<std::uint8_t> mask(out.plan.alpha_cd.begin(), out.plan.alpha_cd.begin() + fr.scene.cfg.m_subcarriers / 2);
    std::vector<std::vector<std::uint8_t>> tried{mask};
    for (;;) {
        const bool to_cd = out.sca.a.metrics.r_cd < out.sca.a.metrics.r_dl;
        int pick = -1;
        double lean = -inf;
        int n_cd = 0;
        for (std::size_t m = 0; m < mask.size(); ++m) n_cd += mask[m];
        if (to_cd ? n_cd + 1 == static_cast<int>(mask.size()) : n_cd == 1) break;
        for (std::size_t m = 0; m < mask.size(); ++m) {
            if (mask[m] == (to_cd ? 1 : 0)) continue;
            double l = to_cd ? a.upsilon_cd[m] - a.upsilon_dl[m] : a.upsilon_dl[m] - a.upsilon_cd[m];
            if (l > lean) {
                lean = l;
                pick = static_cast<int>(m);
            }
        }
        std::vector<std::uint8_t> next = mask;
        next[pick] = to_cd ? 1 : 0;
        if (std::find(tried.begin(), tried.end(), next) != tried.end()) break;
        tried.push_back(next);

        Iterate trial = out.sca.it;
        Eigen::MatrixXd& gain = to_cd ? trial.pw.p_cd : trial.pw.p_dl;
        Eigen::MatrixXd& lose = to_cd ? trial.pw.p_dl : trial.pw.p_cd;
        // The new side starts from the mean column of that side.
        Eigen::VectorXd fill = Eigen::VectorXd::Zero(gain.rows());
        int count = 0;
        for (std::size_t m = 0; m < mask.size(); ++m) {
            if (mask[m] == (to_cd ? 1 : 0)) {
                fill += gain.col(m);
                ++count;
            }
        }
        gain.col(pick) = fill / std::max(count, 1);
        lose.col(pick).setZero();

        FrameSetup fn = ff;
        fn.plan = fixed_plan(fr.plan, next);
        ScaResult r = restore(fn, trial, opt);
        if (!r.feasible) break;
        r = run_sca(fn, r.it, obj, opt);
        if (!(r.feasible && r.a.psi > out.sca.a.psi)) break;
        out.sca = std::move(r);
        out.plan = fn.plan;
        mask = next;
    }
    return out;
}

SenPeSelection select_sen_pe(const Scene& scene, const Vec3& uav) {
    return greedy_sen_pe(sensing_traces(scene, uav), pe_traces(scene, uav), scene.cfg.m_subcarriers);
}

bool p21_feasible(const Scene& scene, double x, double y, const ScaOptions& opt) {
    SubcarrierPlan plan = sen_pe_plan(scene, select_sen_pe(scene, uav_at(scene.cfg, x, y)));
    FrameSetup f = p21_setup(scene, plan);
    return restore(f, initial_iterate(f, x, y), opt).feasible;
}

InitialPosition find_initial_position(const Scene& scene, const ElaConfig& ela, const ScaOptions& opt) {
    ela.validate();
    const ScenarioConfig& cfg = scene.cfg;
    const Eigen::Vector2d c_da = cfg.area_center.head<2>();
    const Eigen::Vector2d c_tbs = cfg.tbs_pos.head<2>();
    const double span = (c_da - c_tbs).norm();
    const Eigen::Vector2d unit = span > 0.0 ? Eigen::Vector2d((c_da - c_tbs) / span) : Eigen::Vector2d::Zero();

    InitialPosition out;
    std::optional<ScaResult> found;
    std::optional<FrameSetup> setup;
    for (int d = 0; d * ela.l_step_m <= span; ++d) {
        Eigen::Vector2d c = c_da - d * ela.l_step_m * unit;
        out.sel = select_sen_pe(scene, uav_at(cfg, c.x(), c.y()));
        FrameSetup f = p21_setup(scene, sen_pe_plan(scene, out.sel));
        ScaResult r = restore(f, initial_iterate(f, c.x(), c.y()), opt);
        out.dt_steps = d;
        if (r.feasible) {
            found = r;
            setup.emplace(f);
            break;
        }
    }
    if (!found) throw MissionInfeasible("mission infeasible");

    FrameSetup& f = *setup;
    f.position_free = true;
    Iterate it = found->it;
    Assessment a = found->a;
    Iterate outer_prev = it;
    out.qt_path.push_back({it.x, it.y});
    for (int k = 0; k < ela.max_outer; ++k) {
        TrustRegion tr = TrustRegion::defaults(cfg);
        tr.theta = TrustRegion::schedule(k);
        for (int i = 0; i < ela.max_inner; ++i) {
            Step st = sca_step(f, it, a, tr, FrameObjective::min_distance, Accept::improve, opt);
            if (!st.accepted) break;
            double move = planar_distance(st.it, it);
            it = st.it;
            a = st.a;
            if (move <= ela.epsilon_prime) break;
        }
        out.qt_path.push_back({it.x, it.y});
        if (planar_distance(it, outer_prev) <= ela.epsilon) break;
        outer_prev = it;
    }

    JointResult jr = solve_with_split(f, it, FrameObjective::min_distance, opt);
    if (!jr.sca.feasible) throw MissionInfeasible("mission infeasible: no feasible subcarrier split at the initial position");
    out.it = jr.sca.it;
    out.plan = jr.plan;
    return out;
}

FrameOutcome optimize_frame(const Scene& scene, const FrameOptions& fo, const ScaOptions& opt) {
    const ScenarioConfig& cfg = scene.cfg;
    const bool relaxed = fo.decide_split && fo.kind == FrameKind::mdd;
    FrameSetup f = make_setup(scene, fo.plan, fo.kind, relaxed);
    f.position_free = fo.position_free;
    f.sensing = fo.sensing;
    f.mi_qos = fo.sensing && fo.mi_qos;
    if (fo.velocity && fo.position_free) f.prev_pos = uav_at(cfg, fo.start.x(), fo.start.y());

    Iterate it0 = initial_iterate(f, fo.start.x(), fo.start.y());
    ScaResult sca;
    SubcarrierPlan plan = f.plan;
    if (relaxed) {
        JointResult jr = solve_with_split(f, it0, FrameObjective::max_min_rate, opt);
        plan = jr.plan;
        sca = std::move(jr.sca);
    } else {
        ScaResult r = restore(f, it0, opt);
        sca = r.feasible ? run_sca(f, r.it, FrameObjective::max_min_rate, opt) : r;
    }

    FrameOutcome out;
    out.trace = sca.trace;
    out.psi_trace = sca.psi_trace;
    if (!sca.feasible) {
        FrameResult& r = out.result;
        r.frame = fo.frame;
        // A position-free frame still flies to the least-violating point it may reach.
        Eigen::Vector2d pos = fo.start;
        Eigen::Vector2d best(sca.it.x, sca.it.y);
        if (fo.position_free && std::isfinite(best.x()) && std::isfinite(best.y()) &&
            (best - fo.start).norm() <= cfg.max_step_m() * (1.0 + 1e-9))
            pos = best;
        r.uav_pos = uav_at(cfg, pos.x(), pos.y());
        r.r_dl_user.assign(cfg.u_users, 0.0);
        r.mi_per_target.assign(cfg.j_targets, 0.0);
        r.feasible = false;
        r.sca_iters = sca.iters;
        r.plan = plan;
        r.powers = PowerPlan::zeros(cfg.u_users, cfg.j_targets, cfg.m_subcarriers);
        return out;
    }
    out.result = sca.a.metrics;
    out.result.frame = fo.frame;
    out.result.feasible = true;
    out.result.sca_iters = sca.iters;
    out.result.plan = plan;
    out.result.powers = sca.it.pw;
    return out;
}

}  // namespace isac
