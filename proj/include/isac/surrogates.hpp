#pragma once

#include <vector>

#include <Eigen/Dense>

#include "isac/metrics.hpp"

namespace isac {

// v = √s / n, the maximizer of 2v√s - v²n.
double quad_transform_v(double s, double n);

// log2(1 + 2v√s - v²n); -inf when the argument is not positive.
double surrogate_log_rate(double s, double n, double v);

// Per-target sensing quantities on one (PE, SEN) pair as functions of
// q = (p_pe, p_sen[0..J-1], x, y). Natural-log domain.
struct MiInputs {
    int j = 0;
    double eta = 0.0;                       // η_PE of target j on the pair
    Eigen::VectorXd a;                      // J: |G_{j,k}|² Ω̄_SEN,k
    std::vector<Eigen::Vector2d> targets;   // horizontal positions
    Eigen::VectorXd target_dz2;             // squared altitude offsets
    Eigen::Vector2d tbs = Eigen::Vector2d::Zero();
    double tbs_dz2 = 0.0;
    double xi = 0.0;
    double n0 = 0.0;
};

MiInputs mi_inputs(const Scene& s, const Pair& pair, int pair_index, int j);

struct MiPoint {
    double p_pe = 0.0;
    Eigen::VectorXd p_sen;
    double x = 0.0;
    double y = 0.0;
};

// Values of S_MI, N_MI, P_MI and their gradients over q (length J + 3).
struct MiValue {
    double s = 0.0;
    double n = 0.0;
    double p_mi = 0.0;
    Eigen::VectorXd ds, dn, dp;
};

MiValue mi_evaluate(const MiInputs& in, const MiPoint& q);

// `printed` scales the first-order term by 1/ln²(·); `taylor` uses the exact 1/(·).
enum class LinearizationScale { printed, taylor };

// log S(q) ≈ log_s + gs · (q - q0), log N(q) ≈ log_n + gn · (q - q0).
struct MiLinear {
    double log_s = 0.0;
    double log_n = 0.0;
    Eigen::VectorXd gs, gn;
    MiPoint anchor;
};

MiLinear mi_linearization(const MiInputs& in, const MiPoint& q0, LinearizationScale scale);

// Step bounds around the current anchor; theta shrinks them uniformly.
struct TrustRegion {
    double mu_p = 0.0;  // relay output power (W)
    double mu_s = 0.0;  // probing power (W)
    double mu_x = 0.0;
    double mu_y = 0.0;
    double theta = 1.0;

    static TrustRegion defaults(const ScenarioConfig& cfg);
    static double schedule(int k);  // max(0.9^k, 0.05)
};

// ‖c_next - c_prev‖ - V_max N_s T_s; positive means the step is too long.
double velocity_excess(const ScenarioConfig& cfg, const Vec3& prev, const Vec3& next);

}  // namespace isac
