#pragma once

#include "hypmild/estimates.hpp"
#include "hypmild/state.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace hypmild {

/// One-step propagators on a fixed time step. With the source g linear on [t_{k-1}, t_k],
/// I_k = S(dt) I_{k-1} + A_new g_k + A_old g_{k-1} reproduces int_0^t S(t-s) g(s) ds exactly
/// up to the 4-point Gauss rule in the lag variable.
class DuhamelOperators {
public:
    DuhamelOperators(GridPtr grid, double dt);

    const GridPtr& grid() const { return grid_; }
    double dt() const { return dt_; }

    /// Sources per time node; empty vectors stand for zero.
    struct Sources {
        std::vector<RadialField> u_plain;  // e^{tL} applied directly
        std::vector<RadialField> u_div;    // e^{tL} div
        std::vector<RadialField> theta_div;  // e^{t Delta} div
    };

    /// States at nodes 0..steps starting from init.
    Trajectory propagate(const StateVector& init, const Sources& sources, std::size_t steps) const;

    /// Advance one step given the sources at the previous and current nodes (nullptr = zero).
    StateVector step(const StateVector& prev, const Sources& sources, std::size_t k) const;

    /// Scalar and vector propagators over one step.
    const Eigen::MatrixXd& scalar_step() const { return s_dt_; }
    double vector_damping() const { return damp_; }

private:
    GridPtr grid_;
    double dt_;
    double damp_;
    Eigen::MatrixXd s_dt_;
    Eigen::MatrixXd vec_new_, vec_old_;
    Eigen::MatrixXd vec_div_new_, vec_div_old_;
    Eigen::MatrixXd sca_div_new_, sca_div_old_;
};

using DuhamelPtr = std::shared_ptr<const DuhamelOperators>;
DuhamelPtr duhamel_operators(const GridPtr& grid, double dt);

struct SolverConfig {
    double p = 4.0;
    double rho = 0.0;
    double picard_tol = 1e-8;
    int max_iters = 200;
    int steps_per_period = 128;
    EstimateConstants constants;
};

/// Time grid used by the solvers: steps_per_period nodes per forcing period.
double solver_dt(const ForcingSpec& forcing, const SolverConfig& cfg);

/// Nodal forcing samples F(t_k), f(t_k), h(t_k).
std::vector<RadialField> sample_in_time(const ModulatedField& m, double dt, std::size_t steps);

/// T_h(eta)(t): u-slot int_0^t e^{(t-s)L}(eta(s) h(s)) ds, theta-slot 0. eta is read from the theta slots.
StateVector op_T_h(const Trajectory& eta, const ModulatedField& h, double t);
/// int_0^t e^{-(t-s)A} div [F; f] ds on the time grid of spacing dt.
StateVector op_T_ext(const ForcingSpec& forcing, double dt, double t);
/// B(a, b)(t) = -int_0^t e^{-(t-s)A} div [a_u b_u; a_u b_theta] ds.
StateVector op_B(const Trajectory& a, const Trajectory& b, double t);

/// Phi(traj): e^{-tA} init + B(traj, traj) + T_h(theta slot of traj) + T_ext, at every node.
Trajectory mild_map(const StateVector& init, const Trajectory& traj, const ForcingSpec& forcing);

/// The right-hand side at one node, evaluated as a direct convolution sum with
/// S(t_k - t_j) built independently for every lag (no recurrence); used for residual checks.
StateVector duhamel_rhs(const StateVector& init, const Trajectory& traj, const ForcingSpec& forcing, double t);

/// Linear mild solution with given eta (theta slots of eta_traj, which fixes the time grid).
Trajectory solve_linear(const StateVector& init, const ForcingSpec& forcing, const Trajectory& eta_traj);

/// Linear mild solution with given eta, with eta = 0 and an explicit time grid.
Trajectory solve_linear(const StateVector& init, const ForcingSpec& forcing, double dt, std::size_t steps);

/// The (Bounded) right-hand side: C0 |init| + N |h| |(0, eta)| + M |(F, f)|, with C0 = max(C, 1).
double linear_bound(const StateVector& init, const ForcingSpec& forcing, double eta_norm, const EstimateConstants& c);

struct ConvergenceReport {
    int iterations = 0;
    bool converged = false;
    double margin = 0.0;           // 2 M rho + N |h|
    double ball_lhs = 0.0;         // |init| + M(rho^2 + |(F,f)|) + N |h| rho
    std::vector<double> diffs;     // sup-in-time product-norm differences of consecutive iterates
    std::vector<double> ratios;    // diffs[n] / diffs[n-1]
    double max_iterate_norm = 0.0;
};

/// Contraction margin 2 M rho + N |h|_{inf, p/2}.
double contraction_margin(const ForcingSpec& forcing, const SolverConfig& cfg);
/// Largest rho meeting a target margin.
double rho_for_margin(double target, const ForcingSpec& forcing, const SolverConfig& cfg);
/// Throws PreconditionViolation if the margin or the ball condition fails.
void check_picard_hypotheses(const StateVector& init, const ForcingSpec& forcing, const SolverConfig& cfg,
                             ConvergenceReport& report);

struct PicardResult {
    Trajectory trajectory;
    ConvergenceReport report;
};

/// Iterates Phi on [0, steps * dt] from the semigroup orbit of init (or from warm_start).
PicardResult picard_solve(const StateVector& init, const ForcingSpec& forcing, const SolverConfig& cfg,
                          std::size_t steps, const Trajectory* warm_start = nullptr);

}  // namespace hypmild
