#include "isac/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace isac {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Eigen::VectorXd gather(const Eigen::VectorXd& x, const std::vector<int>& idx) {
    Eigen::VectorXd out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = x[idx[i]];
    return out;
}

double row_value(const LinearRow& r, const Eigen::VectorXd& x) {
    double acc = 0.0;
    for (std::size_t i = 0; i < r.idx.size(); ++i) acc += r.coef[i] * x[r.idx[i]];
    return acc;
}

// Barrier function over x = z (phase 2) or x = (z, s) (phase 1, s relaxes every constraint).
class Barrier {
public:
    Barrier(const ConvexProblem& p, bool phase1) : p_(p), phase1_(phase1), n_(p.n + (phase1 ? 1 : 0)) {
        terms_ = static_cast<int>(p.nonlinear.size() + p.linear.size());
        for (int i = 0; i < p.n; ++i) {
            terms_ += std::isfinite(p.lower[i]) ? 1 : 0;
            terms_ += std::isfinite(p.upper[i]) ? 1 : 0;
        }
        if (phase1) ++terms_;
    }

    int size() const { return n_; }
    int terms() const { return terms_; }

    double slack_shift(const Eigen::VectorXd& x) const { return phase1_ ? x[p_.n] : 0.0; }

    // Objective without the barrier.
    bool objective(const Eigen::VectorXd& x, double& f, Eigen::VectorXd* g, Eigen::MatrixXd* h) const {
        if (g) g->setZero(n_);
        if (h) h->setZero(n_, n_);
        if (phase1_) {
            f = x[p_.n];
            if (g) (*g)[p_.n] = 1.0;
            return true;
        }
        f = 0.0;
        if (p_.linear_objective.size() == p_.n) {
            f += p_.linear_objective.dot(x.head(p_.n));
            if (g) g->head(p_.n) += p_.linear_objective;
        }
        for (const SparseFn& fn : p_.objective_terms) {
            double v = 0.0;
            Eigen::VectorXd lg;
            Eigen::MatrixXd lh;
            if (!fn.eval(gather(x, fn.idx), v, g ? &lg : nullptr, h ? &lh : nullptr) || !std::isfinite(v)) return false;
            f += v;
            scatter(fn.idx, g ? &lg : nullptr, h ? &lh : nullptr, g, h);
        }
        return true;
    }

    // Barrier value φ(x) plus derivatives; false when x is not strictly feasible.
    bool barrier(const Eigen::VectorXd& x, double& phi, Eigen::VectorXd* g, Eigen::MatrixXd* h) const {
        if (g) g->setZero(n_);
        if (h) h->setZero(n_, n_);
        phi = 0.0;
        const double s = slack_shift(x);
        const int si = p_.n;
        for (int i = 0; i < p_.n; ++i) {
            if (std::isfinite(p_.lower[i])) {
                double r = x[i] - p_.lower[i];
                if (!(r > 0.0)) return false;
                phi -= std::log(r);
                if (g) (*g)[i] -= 1.0 / r;
                if (h) (*h)(i, i) += 1.0 / (r * r);
            }
            if (std::isfinite(p_.upper[i])) {
                double r = p_.upper[i] - x[i];
                if (!(r > 0.0)) return false;
                phi -= std::log(r);
                if (g) (*g)[i] += 1.0 / r;
                if (h) (*h)(i, i) += 1.0 / (r * r);
            }
        }
        if (phase1_) {
            double r = s + 1.0;
            if (!(r > 0.0)) return false;
            phi -= std::log(r);
            if (g) (*g)[si] -= 1.0 / r;
            if (h) (*h)(si, si) += 1.0 / (r * r);
        }
        for (const LinearRow& row : p_.linear) {
            double r = row.rhs - row_value(row, x) + s;
            if (!(r > 0.0)) return false;
            phi -= std::log(r);
            if (g || h) {
                idx_.assign(row.idx.begin(), row.idx.end());
                coef_.assign(row.coef.begin(), row.coef.end());
                if (phase1_) {
                    idx_.push_back(si);
                    coef_.push_back(-1.0);
                }
                add_outer(r, g, h);
            }
        }
        for (const SparseFn& fn : p_.nonlinear) {
            double v = 0.0;
            Eigen::VectorXd lg;
            Eigen::MatrixXd lh;
            if (!fn.eval(gather(x, fn.idx), v, g ? &lg : nullptr, h ? &lh : nullptr) || !std::isfinite(v)) return false;
            double r = s - v;
            if (!(r > 0.0)) return false;
            phi -= std::log(r);
            if (g || h) {
                // -log(s - v): gradient (∇v - e_s)/r, Hessian ∇²v/r + (∇v - e_s)(∇v - e_s)^T / r².
                idx_.assign(fn.idx.begin(), fn.idx.end());
                coef_.assign(lg.data(), lg.data() + lg.size());
                if (phase1_) {
                    idx_.push_back(si);
                    coef_.push_back(-1.0);
                }
                add_outer(r, g, h);
                if (h) {
                    for (std::size_t a = 0; a < fn.idx.size(); ++a) {
                        for (std::size_t b = 0; b < fn.idx.size(); ++b) (*h)(fn.idx[a], fn.idx[b]) += lh(a, b) / r;
                    }
                }
            }
        }
        return true;
    }

    // Step length keeping bounds and linear rows strictly feasible.
    double max_step(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) const {
        double a = 1.0;
        const double s = slack_shift(x);
        const double ds = phase1_ ? dx[p_.n] : 0.0;
        auto limit = [&](double r, double dr) {
            if (dr < 0.0) a = std::min(a, 0.99 * r / -dr);
        };
        for (int i = 0; i < p_.n; ++i) {
            if (std::isfinite(p_.lower[i])) limit(x[i] - p_.lower[i], dx[i]);
            if (std::isfinite(p_.upper[i])) limit(p_.upper[i] - x[i], -dx[i]);
        }
        if (phase1_) limit(s + 1.0, ds);
        for (const LinearRow& row : p_.linear) limit(row.rhs - row_value(row, x) + s, -row_value(row, dx) + ds);
        return a;
    }

private:
    // g += c/r and h += c c^T / r² for the sparse vector (idx_, coef_); repeated indices accumulate.
    void add_outer(double r, Eigen::VectorXd* g, Eigen::MatrixXd* h) const {
        const std::size_t k = idx_.size();
        for (std::size_t a = 0; a < k; ++a) {
            if (g) (*g)[idx_[a]] += coef_[a] / r;
            if (!h) continue;
            const double ca = coef_[a] / (r * r);
            for (std::size_t b = 0; b < k; ++b) (*h)(idx_[a], idx_[b]) += ca * coef_[b];
        }
    }

    static void scatter(const std::vector<int>& idx, const Eigen::VectorXd* lg, const Eigen::MatrixXd* lh,
                        Eigen::VectorXd* g, Eigen::MatrixXd* h) {
        if (g && lg) {
            for (std::size_t k = 0; k < idx.size(); ++k) (*g)[idx[k]] += (*lg)[k];
        }
        if (h && lh) {
            for (std::size_t a = 0; a < idx.size(); ++a) {
                for (std::size_t b = 0; b < idx.size(); ++b) (*h)(idx[a], idx[b]) += (*lh)(a, b);
            }
        }
    }

    const ConvexProblem& p_;
    bool phase1_;
    int n_;
    int terms_ = 0;
    mutable std::vector<int> idx_;
    mutable std::vector<double> coef_;
};

struct PathResult {
    Eigen::VectorXd x;
    double objective = 0.0;
    double gap = inf;
    int newton = 0;
    bool capped = false;
    bool early = false;
};

// Barrier path-following. `stop` lets phase 1 quit as soon as the slack turns negative enough.
template <class Stop>
PathResult follow_path(const Barrier& b, Eigen::VectorXd x, const SolverOptions& opt, int max_newton, Stop stop) {
    const int n = b.size();
    PathResult out;
    double t = 1.0;
    Eigen::VectorXd gf(n), gp(n);
    Eigen::MatrixXd hf(n, n), hp(n, n);

    auto merit = [&](const Eigen::VectorXd& y, double& value) {
        double f = 0.0, phi = 0.0;
        if (!b.barrier(y, phi, nullptr, nullptr)) return false;
        if (!b.objective(y, f, nullptr, nullptr)) return false;
        value = t * f + phi;
        return std::isfinite(value);
    };

    for (;;) {
        // Centering.
        for (;;) {
            if (out.newton >= max_newton) {
                out.capped = true;
                break;
            }
            double f = 0.0, phi = 0.0;
            if (!b.objective(x, f, &gf, &hf) || !b.barrier(x, phi, &gp, &hp)) {
                throw std::runtime_error("solve_convex: iterate left the domain");
            }
            Eigen::VectorXd g = t * gf + gp;
            Eigen::MatrixXd h = t * hf + hp;
            h = 0.5 * (h + h.transpose()).eval();
            double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
            Eigen::VectorXd dx;
            double reg = 0.0;
            for (int attempt = 0; attempt < 12; ++attempt) {
                Eigen::LLT<Eigen::MatrixXd> llt(h + reg * Eigen::MatrixXd::Identity(n, n));
                if (llt.info() == Eigen::Success) {
                    dx = -llt.solve(g);
                    if (dx.allFinite()) break;
                }
                reg = reg == 0.0 ? 1e-14 * scale : reg * 100.0;
                dx.resize(0);
            }
            if (dx.size() != n) break;
            double decrement = -g.dot(dx);
            ++out.newton;
            double value0 = t * f + phi;
            // Below the merit's rounding the line search accepts steps that change nothing.
            if (decrement / 2.0 <= std::max(1e-10, 1e-14 * std::abs(value0))) break;

            double a = b.max_step(x, dx);
            bool moved = false;
            for (int k = 0; k < 60; ++k) {
                Eigen::VectorXd y = x + a * dx;
                double value = 0.0;
                if (merit(y, value) && value <= value0 - 0.01 * a * decrement) {
                    x = y;
                    moved = true;
                    break;
                }
                a *= 0.5;
            }
            if (!moved) break;
            if (stop(x)) {
                out.early = true;
                break;
            }
        }
        out.gap = b.terms() / t;
        if (out.early || out.capped || out.gap <= opt.tol) break;
        t *= opt.mu;
    }
    double f = 0.0;
    b.objective(x, f, nullptr, nullptr);
    out.x = x;
    out.objective = f;
    return out;
}

}  // namespace

double max_constraint(const ConvexProblem& p, const Eigen::VectorXd& z) {
    double worst = -inf;
    for (const LinearRow& row : p.linear) worst = std::max(worst, row_value(row, z) - row.rhs);
    for (const SparseFn& fn : p.nonlinear) {
        double v = 0.0;
        if (!fn.eval(gather(z, fn.idx), v, nullptr, nullptr) || !std::isfinite(v)) return inf;
        worst = std::max(worst, v);
    }
    return worst;
}

ConvexSolution solve_convex(const ConvexProblem& p, const Eigen::VectorXd& z0, const SolverOptions& opt) {
    if (p.lower.size() != p.n || p.upper.size() != p.n || z0.size() != p.n) {
        throw std::invalid_argument("solve_convex: dimension mismatch");
    }
    ConvexSolution sol;
    Eigen::VectorXd z = z0;
    for (int i = 0; i < p.n; ++i) {
        double lo = p.lower[i], hi = p.upper[i];
        if (!(hi > lo)) {
            sol.z = z0;
            return sol;  // empty box
        }
        double width = std::isfinite(hi - lo) ? hi - lo : inf;
        double pad = std::min(1e-7, 0.01 * width);
        if (std::isfinite(lo)) z[i] = std::max(z[i], lo + pad);
        if (std::isfinite(hi)) z[i] = std::min(z[i], hi - pad);
    }

    double worst = max_constraint(p, z);
    if (worst == inf || std::isnan(worst)) {
        sol.z = z;
        return sol;
    }
    // A start point hugging a constraint stalls the barrier, so it is recentred too.
    if (worst >= -opt.phase1_margin) {
        Barrier b1(p, true);
        Eigen::VectorXd x(p.n + 1);
        x.head(p.n) = z;
        x[p.n] = worst + std::max(1.0, std::abs(worst));
        auto stop = [&](const Eigen::VectorXd& y) { return y[p.n] < -opt.phase1_margin; };
        PathResult r = follow_path(b1, x, opt, 4 * opt.max_newton, stop);
        sol.phase1_iterations = r.newton;
        if (r.x[p.n] >= opt.infeasible_level) {
            sol.z = r.x.head(p.n);
            sol.kkt_residual = r.gap;
            return sol;
        }
        z = r.x.head(p.n);
    }

    Barrier b2(p, false);
    PathResult r = follow_path(b2, z, opt, opt.max_newton, [](const Eigen::VectorXd&) { return false; });
    sol.z = r.x;
    sol.objective = r.objective;
    sol.kkt_residual = r.gap;
    sol.iterations = r.newton;
    sol.status = r.capped ? SolveStatus::iteration_cap : SolveStatus::solved;
    return sol;
}

}  // namespace isac
