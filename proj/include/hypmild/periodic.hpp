#pragma once

#include "hypmild/mild_solver.hpp"

#include <optional>
#include <vector>

namespace hypmild {

/// Linear mode couples u to a prescribed T-periodic eta; nonlinear mode self-couples through picard_solve.
enum class PoincareMode { linear, nonlinear };

struct PoincareSetup {
    PoincareMode mode = PoincareMode::linear;
    SolverConfig cfg;                 // p, steps_per_period; rho and constants only in nonlinear mode
    std::optional<Trajectory> eta;    // linear mode: theta slots over one period; absent means eta = 0
};

/// Time step and number of steps per period for a setup.
double period_dt(const ForcingSpec& forcing, const PoincareSetup& setup);
std::size_t period_steps(const PoincareSetup& setup);

/// Trajectory over [0, T] of the mild solution started at init.
Trajectory period_solve(const StateVector& init, const ForcingSpec& forcing, const PoincareSetup& setup,
                        const Trajectory* warm_start = nullptr);

/// P(init): the state at t = T.
StateVector poincare_map(const StateVector& init, const ForcingSpec& forcing, const PoincareSetup& setup);

/// (1/n) sum_{k=1..n} P^k(0) in linear mode. P is affine, P(x) = M x + P(0) with M the one-period
/// propagator, so the sum equals sum_{j<n} (n - j) M^j P(0); the matrix sums are built by doubling.
StateVector cesaro_state(std::size_t n, const ForcingSpec& forcing, const PoincareSetup& setup);

struct PeriodicResult {
    explicit PeriodicResult(Trajectory traj) : trajectory(std::move(traj)) {}

    Trajectory trajectory;            // over [0, T], launched from the periodic state
    int iterations = 0;               // Poincare iterations
    std::vector<double> defects;      // |P(x_k) - x_k| per iteration
    double defect = 0.0;              // periodicity defect of the returned trajectory
    std::optional<StateVector> cesaro;  // linear mode only
    double cesaro_gap = 0.0;          // |cesaro - direct|
    std::vector<int> inner_iterations;  // nonlinear mode: Picard iterations per Poincare step
};

/// Iterates P from 0 until |P(x) - x| <= tol; cross-checks against the Cesaro state with cesaro_terms terms.
PeriodicResult find_periodic_linear(const ForcingSpec& forcing, const PoincareSetup& setup, double tol,
                                    int max_iters = 400, std::size_t cesaro_terms = std::size_t{1} << 24,
                                    const StateVector* start = nullptr);

/// Outer Poincare loop with inner Picard solves, each warm-started from the previous trajectory.
PeriodicResult find_periodic_nonlinear(const ForcingSpec& forcing, const SolverConfig& cfg, double tol,
                                       int max_iters = 200);

/// max_k |state(t_k + T) - state(t_k)| over nodes where both exist.
double check_periodicity(const Trajectory& traj, double T, double p);

struct DecayReport {
    std::vector<double> times;
    std::vector<double> delta;        // product norm of the difference
    std::vector<double> delta_u;
    std::vector<double> delta_theta;
    double max_delta = 0.0;
    // least-squares slope of -log delta on the fit window; NaN when delta vanishes there
    double rate = 0.0;
    double rate_u = 0.0;
    double rate_theta = 0.0;
    double fit_from = 0.0;
};

/// Solves from both inits over [0, horizon] (linear mode with eta = 0, or nonlinear Picard) and
/// reports the difference; the rate is fitted on t >= fit_from.
DecayReport uniqueness_experiment(const StateVector& init_a, const StateVector& init_b, const ForcingSpec& forcing,
                                  double horizon, const PoincareSetup& setup, double fit_from);

}  // namespace hypmild
