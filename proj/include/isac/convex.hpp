#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace isac {

// Evaluates a convex function of the variables listed in SparseFn::idx. Returns false outside
// the function's domain; grad and hess may be null when only the value is needed, and arrive
// unsized otherwise.
using FnEval = std::function<bool(const Eigen::VectorXd& local, double& value, Eigen::VectorXd* grad,
                                  Eigen::MatrixXd* hess)>;

struct SparseFn {
    std::vector<int> idx;
    FnEval eval;
};

// a · z <= rhs
struct LinearRow {
    std::vector<int> idx;
    std::vector<double> coef;
    double rhs = 0.0;
};

// minimize c·z + Σ objective_terms  s.t.  nonlinear(z) <= 0, linear rows, lower <= z <= upper.
struct ConvexProblem {
    int n = 0;
    Eigen::VectorXd lower;  // -inf allowed
    Eigen::VectorXd upper;  // +inf allowed
    Eigen::VectorXd linear_objective;
    std::vector<SparseFn> objective_terms;
    std::vector<LinearRow> linear;
    std::vector<SparseFn> nonlinear;
};

struct SolverOptions {
    double tol = 1e-7;        // duality-gap target
    int max_newton = 200;     // Newton steps after phase 1
    double mu = 15.0;         // barrier growth
    double phase1_margin = 1e-4;
    double infeasible_level = -1e-8;
};

enum class SolveStatus { solved, infeasible, iteration_cap };

struct ConvexSolution {
    SolveStatus status = SolveStatus::infeasible;
    Eigen::VectorXd z;
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
    int phase1_iterations = 0;
};

// Log-barrier interior-point method with damped Newton steps. A phase-1 problem restores
// strict feasibility when z0 is not strictly inside every constraint.
ConvexSolution solve_convex(const ConvexProblem& problem, const Eigen::VectorXd& z0, const SolverOptions& opt = {});

// Value of every nonlinear and linear constraint at z (largest entry, +inf outside a domain).
double max_constraint(const ConvexProblem& problem, const Eigen::VectorXd& z);

}  // namespace isac
