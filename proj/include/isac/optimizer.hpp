#pragma once

#include <stdexcept>
#include <vector>

#include "isac/frame_problem.hpp"

namespace isac {

class MissionInfeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolveResult {
    PowerPlan powers;
    double x = 0.0;
    double y = 0.0;
    double objective = 0.0;  // distance² for P2.1, ψ for P3
    SolveStatus status = SolveStatus::infeasible;
    double kkt_residual = 0.0;
};

struct ElaConfig {
    double l_step_m = 100.0;       // along the unit vector from the area centre towards the TBS
    double epsilon = 1.0;          // outer-loop position change (m)
    double epsilon_prime = 0.1;    // inner-loop position change (m)
    int max_outer = 40;
    int max_inner = 25;

    void validate() const;
};

struct ScaOptions {
    int max_iters = 50;
    double rel_tol = 1e-4;       // relative ψ improvement that ends the loop
    int max_retries = 6;         // trust-region halvings per iteration
    double feas_tol = 1e-7;      // accepted normalized violation
    int stage1_cap = 20;
    int restore_iters = 30;
    SolverOptions solver;
};

// Fairness-optimal relay coefficients given fixed DL and probing powers. Each target spends
// its share on the pair with the largest η_PE/Z_TU; χ = B / Σ_j 1/η_j*.
struct PeInit {
    Eigen::MatrixXd p_pe;  // J x M
    double chi = 0.0;
    bool feasible = false;
};

PeInit init_pe_power(const Scene& scene, const SubcarrierPlan& plan, const PowerPlan& base, const Vec3& uav,
                     double budget);

// Equal split of DL, CD and probing power followed by the relay initialization.
Iterate initial_iterate(const FrameSetup& f, double x, double y);

struct TraceRow {
    int k = 0;
    double psi = 0.0;
    double r_dl = 0.0;
    double r_cd = 0.0;
    double mi_sum = 0.0;
    double kkt = 0.0;
};

struct ScaResult {
    Iterate it;
    Assessment a;
    bool feasible = false;
    int iters = 0;
    double kkt = 0.0;
    std::vector<double> psi_trace;
    std::vector<TraceRow> trace;
};

// Minimizes the largest constraint violation by SCA; feasible when it reaches feas_tol.
ScaResult restore(const FrameSetup& f, const Iterate& start, const ScaOptions& opt = {});

// SCA on a feasible start; the objective never worsens between accepted iterates.
ScaResult run_sca(const FrameSetup& f, const Iterate& start, FrameObjective obj, const ScaOptions& opt = {});

// CD mask over M^D from a relaxed iterate: CD where its smoothed-L0 indicator dominates; both
// sides are kept non-empty.
std::vector<std::uint8_t> round_split(const FrameSetup& f, const Assessment& a);

// Relaxed split, restoration and smoothed-L0 stage, rounding, then SCA at the fixed split.
struct JointResult {
    SubcarrierPlan plan;  // fixed split
    ScaResult sca;
};

JointResult solve_with_split(const FrameSetup& relaxed, const Iterate& start, FrameObjective obj,
                             const ScaOptions& opt = {});

// SEN/PE selection from traces at a position, with M^D left relaxed.
SenPeSelection select_sen_pe(const Scene& scene, const Vec3& uav);

// P2.1 power-only feasibility at a fixed position over the relaxed split.
bool p21_feasible(const Scene& scene, double x, double y, const ScaOptions& opt = {});

struct InitialPosition {
    Iterate it;
    SubcarrierPlan plan;
    SenPeSelection sel;
    int dt_steps = 0;
    std::vector<Eigen::Vector2d> qt_path;  // accepted outer-loop positions
};

// Double-layer search: march from the area towards the TBS until P2.1 is solvable, then pull
// the position towards the take-off point. Throws MissionInfeasible.
InitialPosition find_initial_position(const Scene& scene, const ElaConfig& ela = {}, const ScaOptions& opt = {});

struct FrameOptions {
    FrameKind kind = FrameKind::mdd;
    SubcarrierPlan plan;        // SEN/PE fixed; M^D relaxed when decide_split
    bool decide_split = true;
    bool position_free = true;
    Eigen::Vector2d start = Eigen::Vector2d::Zero();  // previous position
    bool velocity = true;
    bool sensing = true;
    bool mi_qos = true;
    int frame = 1;
};

struct FrameOutcome {
    FrameResult result;  // rates, MI and powers zeroed when out of service
    std::vector<TraceRow> trace;
    std::vector<double> psi_trace;
};

// Max-min rate frame problem. An infeasible position-free frame moves to the restoration point if
// it lies within reach; otherwise the UAV holds position.
FrameOutcome optimize_frame(const Scene& scene, const FrameOptions& fo, const ScaOptions& opt = {});

FrameSetup make_setup(const Scene& scene, const SubcarrierPlan& plan, FrameKind kind, bool relaxed);

}  // namespace isac
