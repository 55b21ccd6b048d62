#pragma once

#include <optional>
#include <vector>

#include "isac/allocation.hpp"
#include "isac/convex.hpp"
#include "isac/surrogates.hpp"

namespace isac {

// relaxed: every M^D subcarrier carries both DL and CD powers, coupled by the smoothed-L0 rows.
enum class SplitMode { relaxed, fixed };

enum class FrameObjective { min_distance, max_min_rate, restoration };

struct FrameSetup {
    explicit FrameSetup(const Scene& s) : scene(s) {}

    Scene scene;
    SubcarrierPlan plan;  // under `relaxed`, alpha_dl = alpha_cd = 1 on all of M^D
    SplitMode split = SplitMode::fixed;
    FrameKind kind = FrameKind::mdd;
    Prefactors pre;
    bool position_free = false;
    Vec3 takeoff = Vec3::Zero();
    std::optional<Vec3> prev_pos;  // velocity reference
    bool dl_qos = true;            // per-user R_DL^min
    bool cd_qos = false;           // R_CD >= U R_DL^min
    bool mi_qos = true;
    bool sensing = true;           // false pins probing and relay powers at zero
    SmoothingState rho;
    LinearizationScale scale = LinearizationScale::taylor;
    double mi_margin = 2e-3;       // relative tightening of the linearized MI rows
};

SubcarrierPlan relaxed_plan(const SubcarrierPlan& plan, int m_subcarriers);

struct Iterate {
    PowerPlan pw;
    double x = 0.0;
    double y = 0.0;
};

// True (non-convexified) metrics and the largest normalized constraint violation.
struct Assessment {
    FrameResult metrics;
    double violation = 0.0;
    double psi = 0.0;        // min(R_DL, R_CD)
    double distance2 = 0.0;  // to the take-off point
    std::vector<double> upsilon_dl, upsilon_cd;  // per M^D subcarrier, relaxed split only
};

Assessment assess(const FrameSetup& f, const Iterate& it);

struct Subproblem {
    enum class Kind { dl, cd, sen, pe, x, y, psi, slack };
    struct Var {
        Kind kind;
        int row = 0;  // user or target
        int col = 0;  // subcarrier
        double scale = 1.0;
        double offset = 0.0;
    };

    ConvexProblem problem;
    Eigen::VectorXd z0;
    Iterate anchor;
    std::vector<Var> vars;

    Iterate decode(const Eigen::VectorXd& z) const;
};

// Convexified frame problem around `anchor`: quadratic-transform rate bounds, linearized MI and
// relay power, smoothed-L0 majorizers, budgets, trust region and velocity.
Subproblem build_constraints(const FrameSetup& f, const Iterate& anchor, const TrustRegion& tr, FrameObjective obj);

}  // namespace isac
