#include "isac/frame_problem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <unordered_map>

namespace isac {

namespace {

constexpr double ln2 = std::numbers::ln2;
constexpr double inf = std::numeric_limits<double>::infinity();

using PhysEval = std::function<bool(const Eigen::VectorXd& q, double& v, Eigen::VectorXd* g, Eigen::MatrixXd* h)>;

// Wraps a function of physical quantities q = offset + scale ⊙ z.
SparseFn scaled_fn(const std::vector<int>& idx, const std::vector<Subproblem::Var>& vars, PhysEval f) {
    Eigen::VectorXd sc(idx.size()), off(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        sc[i] = vars[idx[i]].scale;
        off[i] = vars[idx[i]].offset;
    }
    SparseFn fn;
    fn.idx = idx;
    fn.eval = [sc, off, f](const Eigen::VectorXd& z, double& v, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
        Eigen::VectorXd q = off + sc.cwiseProduct(z);
        if (!f(q, v, g, h)) return false;
        if (g) *g = g->cwiseProduct(sc);
        if (h) *h = sc.asDiagonal() * (*h) * sc.asDiagonal();
        return true;
    };
    return fn;
}

// g(z) - s for restoration.
SparseFn relax(SparseFn fn, int slack) {
    const int n = static_cast<int>(fn.idx.size());
    FnEval inner = fn.eval;
    fn.idx.push_back(slack);
    fn.eval = [inner, n](const Eigen::VectorXd& z, double& v, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
        Eigen::VectorXd gi;
        Eigen::MatrixXd hi;
        if (!inner(z.head(n), v, g ? &gi : nullptr, h ? &hi : nullptr)) return false;
        v -= z[n];
        if (g) {
            g->resize(n + 1);
            g->head(n) = gi;
            (*g)[n] = -1.0;
        }
        if (h) {
            h->setZero(n + 1, n + 1);
            h->topLeftCorner(n, n) = hi;
        }
        return true;
    };
    return fn;
}

// Local index bookkeeping for one SparseFn.
struct LocalVars {
    std::vector<int> idx;
    std::unordered_map<int, int> pos;
    int add(int global) {
        auto it = pos.find(global);
        if (it != pos.end()) return it->second;
        int k = static_cast<int>(idx.size());
        idx.push_back(global);
        pos.emplace(global, k);
        return k;
    }
};

// log(1 + 2v√(a p) - v²(Σ b p' + c Z(x, y))); Z = (x - cx)² + (y - cy)² + h2.
struct QtTerm {
    int sig = -1;
    double a = 0.0;
    std::vector<std::pair<int, double>> interf;
    double c = 0.0;
    double cx = 0.0, cy = 0.0, h2 = 0.0;
    double v = 0.0;
};

// (constant + linear · q - Σ log w) / norm
struct QtSum {
    std::vector<QtTerm> terms;
    std::vector<std::pair<int, double>> linear;
    double constant = 0.0;
    double norm = 1.0;
    int ix = -1, iy = -1;
    double x_fixed = 0.0, y_fixed = 0.0;
    int n = 0;

    bool operator()(const Eigen::VectorXd& q, double& val, Eigen::VectorXd* g, Eigen::MatrixXd* h) const {
        double x = ix >= 0 ? q[ix] : x_fixed;
        double y = iy >= 0 ? q[iy] : y_fixed;
        if (g) g->setZero(n);
        if (h) h->setZero(n, n);
        double acc = constant;
        for (const auto& [i, w] : linear) {
            acc += w * q[i];
            if (g) (*g)[i] += w / norm;
        }
        Eigen::VectorXd dw(n);
        for (const QtTerm& t : terms) {
            double p = q[t.sig];
            if (!(p > 0.0)) return false;
            double root = std::sqrt(t.a * p);
            double dx = x - t.cx, dy = y - t.cy;
            double z = dx * dx + dy * dy + t.h2;
            double noise = t.c * z;
            for (const auto& [i, b] : t.interf) noise += b * q[i];
            double w = 1.0 + 2.0 * t.v * root - t.v * t.v * noise;
            if (!(w > 0.0)) return false;
            acc -= std::log(w);
            if (!g && !h) continue;
            dw.setZero();
            dw[t.sig] = t.v * root / p;
            for (const auto& [i, b] : t.interf) dw[i] -= t.v * t.v * b;
            if (ix >= 0) dw[ix] -= 2.0 * t.v * t.v * t.c * dx;
            if (iy >= 0) dw[iy] -= 2.0 * t.v * t.v * t.c * dy;
            if (g) *g -= dw / (w * norm);
            if (h) {
                // -∇² log w = (∇w ∇w^T / w - ∇²w) / w
                *h += dw * dw.transpose() / (w * w * norm);
                (*h)(t.sig, t.sig) += 0.5 * t.v * root / (p * p) / (w * norm);
                if (ix >= 0) (*h)(ix, ix) += 2.0 * t.v * t.v * t.c / (w * norm);
                if (iy >= 0) (*h)(iy, iy) += 2.0 * t.v * t.v * t.c / (w * norm);
            }
        }
        val = acc / norm;
        return true;
    }
};

struct Builder {
    const FrameSetup& f;
    const Iterate& anchor;
    const TrustRegion& tr;
    FrameObjective obj;
    Subproblem sp;
    std::vector<double> lo, hi, z0;
    Eigen::MatrixXi dl_var, cd_var, sen_var, pe_var;
    int x_var = -1, y_var = -1, psi_var = -1, slack_var = -1;
    double p_uav, p_tbs, n0;

    Builder(const FrameSetup& f_, const Iterate& a, const TrustRegion& t, FrameObjective o)
        : f(f_), anchor(a), tr(t), obj(o) {
        p_uav = f.scene.cfg.p_uav_w();
        p_tbs = f.scene.cfg.p_tbs_w();
        n0 = f.scene.cfg.n0_w();
    }

    int add_var(Subproblem::Kind kind, int row, int col, double scale, double offset, double lower, double upper,
                double start) {
        sp.vars.push_back({kind, row, col, scale, offset});
        lo.push_back(lower);
        hi.push_back(upper);
        z0.push_back(start);
        return static_cast<int>(sp.vars.size()) - 1;
    }

    Vec3 anchor_pos() const { return uav_at(f.scene.cfg, anchor.x, anchor.y); }

    // Relay output per unit amplification at the anchor.
    double relay_unit(const Pair& pair, int j) const {
        PowerPlan unit = anchor.pw;
        unit.p_pe(j, pair.pe) = 1.0;
        return relay_output_power(f.scene, unit, anchor_pos(), pair, j);
    }

    void make_vars() {
        const ScenarioConfig& cfg = f.scene.cfg;
        const int U = cfg.u_users, J = cfg.j_targets, M = cfg.m_subcarriers;
        dl_var = Eigen::MatrixXi::Constant(U, M, -1);
        cd_var = Eigen::MatrixXi::Constant(U, M, -1);
        sen_var = Eigen::MatrixXi::Constant(J, M, -1);
        pe_var = Eigen::MatrixXi::Constant(J, M, -1);
        using K = Subproblem::Kind;
        for (int m : f.plan.dl_set()) {
            for (int u = 0; u < U; ++u) dl_var(u, m) = add_var(K::dl, u, m, p_uav, 0.0, 0.0, 1.0, anchor.pw.p_dl(u, m) / p_uav);
        }
        for (int m : f.plan.cd_set()) {
            for (int u = 0; u < U; ++u) cd_var(u, m) = add_var(K::cd, u, m, p_tbs, 0.0, 0.0, 1.0, anchor.pw.p_cd(u, m) / p_tbs);
        }
        if (f.sensing) {
            double ds = tr.theta * tr.mu_s / p_uav;
            for (int m : f.plan.sen_set()) {
                for (int j = 0; j < J; ++j) {
                    double z = anchor.pw.p_sen(j, m) / p_uav;
                    sen_var(j, m) = add_var(K::sen, j, m, p_uav, 0.0, std::max(0.0, z - ds), std::min(1.0, z + ds), z);
                }
            }
            double dp = tr.theta * tr.mu_p / p_uav;
            for (const Pair& pair : f.plan.pairs) {
                for (int j = 0; j < J; ++j) {
                    double scale = p_uav / relay_unit(pair, j);
                    double z = anchor.pw.p_pe(j, pair.pe) / scale;
                    pe_var(j, pair.pe) = add_var(K::pe, j, pair.pe, scale, 0.0, std::max(0.0, z - dp), z + dp, z);
                }
            }
        }
        if (f.position_free) {
            x_var = add_var(K::x, 0, 0, tr.mu_x, anchor.x, -tr.theta, tr.theta, 0.0);
            y_var = add_var(K::y, 0, 0, tr.mu_y, anchor.y, -tr.theta, tr.theta, 0.0);
        }
    }

    // Adds a linear row given physical coefficients on global vars: Σ c_i q_i <= rhs.
    void add_row(const std::map<int, double>& coef, double rhs, double norm) {
        LinearRow row;
        for (const auto& [i, c] : coef) {
            if (c == 0.0) continue;
            row.idx.push_back(i);
            row.coef.push_back(c * sp.vars[i].scale / norm);
            rhs -= c * sp.vars[i].offset;
        }
        row.rhs = rhs / norm;
        if (slack_var >= 0) {
            row.idx.push_back(slack_var);
            row.coef.push_back(-1.0);
        }
        sp.problem.linear.push_back(std::move(row));
    }

    void add_nonlinear(SparseFn fn) {
        if (slack_var >= 0) fn = relax(std::move(fn), slack_var);
        sp.problem.nonlinear.push_back(std::move(fn));
    }

    void add_qt(QtSum sum, LocalVars& lv) {
        sum.n = static_cast<int>(lv.idx.size());
        if (x_var >= 0) sum.ix = lv.add(x_var), sum.n = static_cast<int>(lv.idx.size());
        if (y_var >= 0) sum.iy = lv.add(y_var), sum.n = static_cast<int>(lv.idx.size());
        sum.x_fixed = anchor.x;
        sum.y_fixed = anchor.y;
        add_nonlinear(scaled_fn(lv.idx, sp.vars, sum));
    }

    // DL terms for the users in `users`; signal and interference follow the SINR expression.
    void dl_terms(QtSum& sum, LocalVars& lv, const std::vector<int>& users) {
        const ScenarioConfig& cfg = f.scene.cfg;
        const int U = cfg.u_users;
        for (int m : f.plan.dl_set()) {
            const SubcarrierChannels& c = f.scene.ch.sc[m];
            for (int u : users) {
                const Vec3& pu = f.scene.layout.users[u];
                QtTerm t;
                t.sig = lv.add(dl_var(u, m));
                t.a = c.omega_dl_bar[u] * c.g_dl_abs2(u, u);
                double interf0 = 0.0;
                for (int v = 0; v < U; ++v) {
                    if (v == u) continue;
                    double b = c.omega_dl_bar[u] * c.g_dl_abs2(v, u);
                    t.interf.push_back({lv.add(dl_var(v, m)), b});
                    interf0 += b * anchor.pw.p_dl(v, m);
                }
                t.c = n0;
                t.cx = pu.x();
                t.cy = pu.y();
                double dz = cfg.uav_alt_m - pu.z();
                t.h2 = dz * dz;
                double noise0 = interf0 + n0 * squared_distance(anchor_pos(), pu);
                t.v = quad_transform_v(t.a * anchor.pw.p_dl(u, m), noise0);
                sum.terms.push_back(std::move(t));
            }
        }
    }

    void cd_terms(QtSum& sum, LocalVars& lv) {
        const ScenarioConfig& cfg = f.scene.cfg;
        double dz = cfg.uav_alt_m - cfg.tbs_pos.z();
        double noise0 = n0 * squared_distance(anchor_pos(), cfg.tbs_pos);
        for (int m : f.plan.cd_set()) {
            const SubcarrierChannels& c = f.scene.ch.sc[m];
            for (int u = 0; u < cfg.u_users; ++u) {
                QtTerm t;
                t.sig = lv.add(cd_var(u, m));
                t.a = c.eta_cd[u];
                t.c = n0;
                t.cx = cfg.tbs_pos.x();
                t.cy = cfg.tbs_pos.y();
                t.h2 = dz * dz;
                t.v = quad_transform_v(t.a * anchor.pw.p_cd(u, m), noise0);
                sum.terms.push_back(std::move(t));
            }
        }
    }

    void rate_constraints(const Assessment& a0) {
        const ScenarioConfig& cfg = f.scene.cfg;
        const int U = cfg.u_users;
        if (f.dl_qos && !f.plan.dl_set().empty()) {
            for (int u = 0; u < U; ++u) {
                QtSum sum;
                LocalVars lv;
                dl_terms(sum, lv, {u});
                sum.constant = cfg.r_dl_min * ln2 / f.pre.dl;
                sum.norm = std::max(1.0, sum.constant);
                add_qt(std::move(sum), lv);
            }
        }
        if (f.cd_qos) {
            QtSum sum;
            LocalVars lv;
            cd_terms(sum, lv);
            sum.constant = U * cfg.r_dl_min * ln2 / f.pre.cd;
            sum.norm = std::max(1.0, sum.constant);
            add_qt(std::move(sum), lv);
        }
        if (psi_var >= 0) {
            std::vector<int> all(U);
            for (int u = 0; u < U; ++u) all[u] = u;
            double psi_scale = sp.vars[psi_var].scale;
            {
                QtSum sum;
                LocalVars lv;
                dl_terms(sum, lv, all);
                sum.linear.push_back({lv.add(psi_var), ln2 / f.pre.dl});
                sum.norm = psi_scale * ln2 / f.pre.dl;
                add_qt(std::move(sum), lv);
            }
            {
                QtSum sum;
                LocalVars lv;
                cd_terms(sum, lv);
                sum.linear.push_back({lv.add(psi_var), ln2 / f.pre.cd});
                sum.norm = psi_scale * ln2 / f.pre.cd;
                add_qt(std::move(sum), lv);
            }
        }
        (void)a0;
    }

    // MI rows and the relay part of the UAV power rows.
    void sensing_constraints(const Assessment& a0) {
        const ScenarioConfig& cfg = f.scene.cfg;
        const int J = cfg.j_targets;
        const Vec3 pos = anchor_pos();
        std::map<int, double> relay_coef;
        double relay_const = 0.0;
        for (int j = 0; j < J; ++j) {
            std::map<int, double> coef;
            double base = 0.0;
            for (int k = 0; k < static_cast<int>(f.plan.pairs.size()); ++k) {
                const Pair& pair = f.plan.pairs[k];
                MiInputs in = mi_inputs(f.scene, pair, k, j);
                MiPoint q0;
                q0.p_pe = anchor.pw.p_pe(j, pair.pe);
                q0.p_sen = anchor.pw.p_sen.col(pair.sen);
                q0.x = pos.x();
                q0.y = pos.y();
                std::vector<int> gvar(J + 3, -1);
                gvar[0] = pe_var(j, pair.pe);
                for (int i = 0; i < J; ++i) gvar[1 + i] = sen_var(i, pair.sen);
                gvar[J + 1] = x_var;
                gvar[J + 2] = y_var;
                Eigen::VectorXd qv(J + 3);
                qv << q0.p_pe, q0.p_sen, q0.x, q0.y;

                MiLinear lin = mi_linearization(in, q0, f.scale);
                base += lin.log_s - lin.log_n;
                Eigen::VectorXd d = lin.gs - lin.gn;
                for (int i = 0; i < J + 3; ++i) {
                    if (gvar[i] < 0) continue;
                    // -d·(q - q0) <= ...; the anchor value moves to the right-hand side.
                    coef[gvar[i]] -= d[i];
                    base -= d[i] * qv[i];
                }

                MiValue mv = mi_evaluate(in, q0);
                relay_const += mv.p_mi;
                for (int i = 0; i < J + 3; ++i) {
                    if (gvar[i] < 0) continue;
                    relay_coef[gvar[i]] += mv.dp[i];
                    relay_const -= mv.dp[i] * qv[i];
                }
            }
            if (f.mi_qos) {
                double target = cfg.r_mi_min * (1.0 + f.mi_margin);
                double have = a0.metrics.mi_per_target[j];
                if (obj != FrameObjective::restoration && have >= cfg.r_mi_min) target = std::min(target, have);
                double need = target * ln2 / f.pre.mi;
                // base - Σ coef... : Σ_k (log S̃ - log Ñ) >= need  <=>  Σ coef·q <= base - need
                add_row(coef, base - need, std::max(1.0, need));
            }
        }

        std::map<int, double> dl_coef, sen_coef;
        for (int m : f.plan.dl_set()) {
            for (int u = 0; u < cfg.u_users; ++u) dl_coef[dl_var(u, m)] += 1.0;
        }
        for (int m : f.plan.sen_set()) {
            for (int j = 0; j < J; ++j) sen_coef[sen_var(j, m)] += 1.0;
        }
        if (f.kind == FrameKind::mdd) {
            std::map<int, double> all = relay_coef;
            for (const auto& [i, c] : dl_coef) all[i] += c;
            for (const auto& [i, c] : sen_coef) all[i] += c;
            add_row(all, p_uav - relay_const, p_uav);
        } else {
            add_row(dl_coef, p_uav, p_uav);
            add_row(sen_coef, p_uav, p_uav);
            add_row(relay_coef, p_uav - relay_const, p_uav);
        }
    }

    void power_rows_without_sensing() {
        const ScenarioConfig& cfg = f.scene.cfg;
        std::map<int, double> dl_coef;
        for (int m : f.plan.dl_set()) {
            for (int u = 0; u < cfg.u_users; ++u) dl_coef[dl_var(u, m)] += 1.0;
        }
        add_row(dl_coef, p_uav, p_uav);
    }

    void budget_and_l0() {
        const ScenarioConfig& cfg = f.scene.cfg;
        std::map<int, double> cd_coef;
        for (int m : f.plan.cd_set()) {
            for (int u = 0; u < cfg.u_users; ++u) cd_coef[cd_var(u, m)] += 1.0;
        }
        add_row(cd_coef, p_tbs, p_tbs);
        if (f.split != SplitMode::relaxed) return;
        for (int m = 0; m < cfg.m_subcarriers / 2; ++m) {
            double td = anchor.pw.p_dl.col(m).sum();
            double tc = anchor.pw.p_cd.col(m).sum();
            double ed = std::exp(-td / f.rho.rho_dl);
            double ec = std::exp(-tc / f.rho.rho_cd);
            std::map<int, double> coef;
            for (int u = 0; u < cfg.u_users; ++u) {
                coef[dl_var(u, m)] += ed / f.rho.rho_dl;
                coef[cd_var(u, m)] += ec / f.rho.rho_cd;
            }
            add_row(coef, ed * (1.0 + td / f.rho.rho_dl) + ec * (1.0 + tc / f.rho.rho_cd) - 1.0, 1.0);
        }
    }

    void velocity() {
        if (!f.prev_pos || x_var < 0) return;
        const double px = f.prev_pos->x(), py = f.prev_pos->y();
        const double d2 = std::pow(f.scene.cfg.max_step_m(), 2);
        PhysEval fn = [px, py, d2](const Eigen::VectorXd& q, double& v, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
            double dx = q[0] - px, dy = q[1] - py;
            v = (dx * dx + dy * dy) / d2 - 1.0;
            if (g) *g = Eigen::Vector2d(2.0 * dx / d2, 2.0 * dy / d2);
            if (h) *h = Eigen::Matrix2d::Identity() * (2.0 / d2);
            return true;
        };
        add_nonlinear(scaled_fn({x_var, y_var}, sp.vars, fn));
    }

    void objective(const Assessment& a0) {
        const int n = static_cast<int>(sp.vars.size());
        sp.problem.linear_objective = Eigen::VectorXd::Zero(n);
        if (obj == FrameObjective::restoration) {
            sp.problem.linear_objective[slack_var] = 1.0;
        } else if (obj == FrameObjective::max_min_rate) {
            sp.problem.linear_objective[psi_var] = -1.0;
        } else if (x_var >= 0) {
            const double tx = f.takeoff.x(), ty = f.takeoff.y();
            const double dz = f.scene.cfg.uav_alt_m - f.takeoff.z();
            const double ref = std::max(tr.mu_x * tr.mu_x, a0.distance2);
            PhysEval fn = [tx, ty, dz, ref](const Eigen::VectorXd& q, double& v, Eigen::VectorXd* g, Eigen::MatrixXd* h) {
                double dx = q[0] - tx, dy = q[1] - ty;
                v = (dx * dx + dy * dy + dz * dz) / ref;
                if (g) *g = Eigen::Vector2d(2.0 * dx / ref, 2.0 * dy / ref);
                if (h) *h = Eigen::Matrix2d::Identity() * (2.0 / ref);
                return true;
            };
            sp.problem.objective_terms.push_back(scaled_fn({x_var, y_var}, sp.vars, fn));
        }
    }

    Subproblem build() {
        Assessment a0 = assess(f, anchor);
        sp.anchor = anchor;
        make_vars();
        if (obj == FrameObjective::max_min_rate) {
            double scale = std::max(1.0, a0.psi);
            psi_var = add_var(Subproblem::Kind::psi, 0, 0, scale, 0.0, -1.0, inf, a0.psi / scale);
        }
        if (obj == FrameObjective::restoration) {
            slack_var = add_var(Subproblem::Kind::slack, 0, 0, 1.0, 0.0, -1.0, inf, 0.0);
        }
        rate_constraints(a0);
        if (f.sensing) {
            sensing_constraints(a0);
        } else {
            power_rows_without_sensing();
        }
        budget_and_l0();
        velocity();
        objective(a0);

        const int n = static_cast<int>(sp.vars.size());
        sp.problem.n = n;
        sp.problem.lower = Eigen::Map<Eigen::VectorXd>(lo.data(), n);
        sp.problem.upper = Eigen::Map<Eigen::VectorXd>(hi.data(), n);
        sp.z0 = Eigen::Map<Eigen::VectorXd>(z0.data(), n);
        if (slack_var >= 0) {
            double worst = max_constraint(sp.problem, sp.z0);
            sp.z0[slack_var] = (std::isfinite(worst) ? std::max(worst, 0.0) : 0.0) + 1.0;
        }
        return std::move(sp);
    }
};

}  // namespace

SubcarrierPlan relaxed_plan(const SubcarrierPlan& plan, int m_subcarriers) {
    SubcarrierPlan out = plan;
    for (int m = 0; m < m_subcarriers / 2; ++m) {
        out.alpha_dl[m] = 1;
        out.alpha_cd[m] = 1;
    }
    return out;
}

Assessment assess(const FrameSetup& f, const Iterate& it) {
    const ScenarioConfig& cfg = f.scene.cfg;
    const Vec3 pos = uav_at(cfg, it.x, it.y);
    Assessment a;
    a.metrics = evaluate_frame(f.scene, f.plan, it.pw, pos, f.pre, f.kind);
    a.psi = a.metrics.r_e2e;
    a.distance2 = squared_distance(pos, f.takeoff);

    double worst = -inf;
    auto note = [&](double v) { worst = std::max(worst, v); };
    if (f.dl_qos && !f.plan.dl_set().empty()) {
        for (double r : a.metrics.r_dl_user) note((cfg.r_dl_min - r) / std::max(1.0, cfg.r_dl_min));
    }
    if (f.cd_qos) {
        double need = cfg.u_users * cfg.r_dl_min;
        note((need - a.metrics.r_cd) / std::max(1.0, need));
    }
    if (f.sensing && f.mi_qos) {
        for (double mi : a.metrics.mi_per_target) note((cfg.r_mi_min - mi) / std::max(1.0, cfg.r_mi_min));
    }
    const double p_uav = cfg.p_uav_w();
    if (f.kind == FrameKind::mdd) {
        note(a.metrics.power_used_uav / p_uav - 1.0);
    } else {
        UavPower up = uav_power_used(f.scene, f.plan, it.pw, pos);
        note(up.peak_phase() / p_uav - 1.0);
    }
    note(a.metrics.power_used_tbs / cfg.p_tbs_w() - 1.0);
    if (f.split == SplitMode::relaxed) {
        for (int m = 0; m < cfg.m_subcarriers / 2; ++m) {
            double ud = l0_majorizer(it.pw.p_dl.col(m).sum(), 0.0, f.rho.rho_dl).upsilon;
            double uc = l0_majorizer(it.pw.p_cd.col(m).sum(), 0.0, f.rho.rho_cd).upsilon;
            a.upsilon_dl.push_back(ud);
            a.upsilon_cd.push_back(uc);
            note(ud + uc - 1.0);
        }
    }
    if (f.prev_pos) note(velocity_excess(cfg, *f.prev_pos, pos) / cfg.max_step_m());
    if ((it.pw.p_dl.array() < 0.0).any() || (it.pw.p_cd.array() < 0.0).any() || (it.pw.p_sen.array() < 0.0).any() ||
        (it.pw.p_pe.array() < 0.0).any()) {
        note(inf);
    }
    a.violation = std::max(0.0, worst);
    return a;
}

Iterate Subproblem::decode(const Eigen::VectorXd& z) const {
    Iterate out = anchor;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const Var& v = vars[i];
        double q = v.offset + v.scale * z[i];
        switch (v.kind) {
            case Kind::dl: out.pw.p_dl(v.row, v.col) = std::max(q, 0.0); break;
            case Kind::cd: out.pw.p_cd(v.row, v.col) = std::max(q, 0.0); break;
            case Kind::sen: out.pw.p_sen(v.row, v.col) = std::max(q, 0.0); break;
            case Kind::pe: out.pw.p_pe(v.row, v.col) = std::max(q, 0.0); break;
            case Kind::x: out.x = q; break;
            case Kind::y: out.y = q; break;
            case Kind::psi:
            case Kind::slack: break;
        }
    }
    return out;
}

Subproblem build_constraints(const FrameSetup& f, const Iterate& anchor, const TrustRegion& tr, FrameObjective obj) {
    Builder b(f, anchor, tr, obj);
    return b.build();
}

}  // namespace isac
