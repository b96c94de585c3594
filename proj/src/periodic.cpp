#include "hypmild/periodic.hpp"

#include "hypmild/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace hypmild {

namespace {

std::size_t period_nodes(double T, double dt) {
    const double m = T / dt;
    const auto k = static_cast<std::size_t>(std::llround(m));
    if (k == 0 || std::abs(m - static_cast<double>(k)) > 1e-9 * m) {
        throw GridMismatch("period is not a whole number of time steps");
    }
    return k;
}

// eta repeated with its own period to cover steps + 1 nodes
Trajectory periodic_extension(const Trajectory& eta, std::size_t steps) {
    const std::size_t m = eta.size() - 1;
    if (m == 0) throw InvalidArgument("eta needs at least two nodes");
    std::vector<StateVector> out;
    out.reserve(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) out.push_back(eta[k % m]);
    return Trajectory(eta.dt(), std::move(out));
}

Trajectory linear_solve(const StateVector& init, const ForcingSpec& forcing, const PoincareSetup& setup, double dt,
                        std::size_t steps) {
    if (!setup.eta) return solve_linear(init, forcing, dt, steps);
    if (std::abs(setup.eta->dt() - dt) > 1e-15 * dt) throw GridMismatch("eta sampled on a different time grid");
    return solve_linear(init, forcing, periodic_extension(*setup.eta, steps));
}

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& m, std::size_t k) {
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(m.rows(), m.cols());
    Eigen::MatrixXd base = m;
    while (k > 0) {
        if (k & 1u) result = result * base;
        k >>= 1;
        if (k > 0) base = base * base;
    }
    return result;
}

// s_n = sum_{j<n} M^j b and w_n = sum_{j<n} j M^j b, by binary composition of blocks
Eigen::VectorXd cesaro_sum(const Eigen::MatrixXd& m, const Eigen::VectorXd& b, std::size_t n) {
    Eigen::MatrixXd pa = Eigen::MatrixXd::Identity(m.rows(), m.cols());
    Eigen::VectorXd s = Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd w = Eigen::VectorXd::Zero(b.size());
    double a = 0.0;
    int top = 0;
    while ((n >> top) > 1) ++top;
    for (int bit = top; bit >= 0; --bit) {
        if (a > 0) {
            const Eigen::VectorXd ms = pa * s;
            w += pa * w + a * ms;
            s += ms;
            pa = pa * pa;
            a *= 2;
        }
        if ((n >> bit) & 1u) {
            const Eigen::VectorXd mb = pa * b;
            w += a * mb;
            s += mb;
            pa = pa * m;
            a += 1;
        }
    }
    // (1/n) sum_{k=1..n} P^k(0) = (1/n) sum_{j<n} (n - j) M^j b
    return s - w / static_cast<double>(n);
}

double fit_rate(const std::vector<double>& t, const std::vector<double>& v, double from) {
    double n = 0, st = 0, sv = 0, stt = 0, stv = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] < from || !(v[k] > 0.0)) continue;
        const double y = std::log(v[k]);
        n += 1;
        st += t[k];
        sv += y;
        stt += t[k] * t[k];
        stv += t[k] * y;
    }
    const double den = n * stt - st * st;
    if (n < 2 || den <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return -(n * stv - st * sv) / den;
}

}  // namespace

double period_dt(const ForcingSpec& forcing, const PoincareSetup& setup) { return solver_dt(forcing, setup.cfg); }

std::size_t period_steps(const PoincareSetup& setup) {
    if (setup.cfg.steps_per_period < 1) throw InvalidArgument("steps_per_period must be positive");
    return static_cast<std::size_t>(setup.cfg.steps_per_period);
}

Trajectory period_solve(const StateVector& init, const ForcingSpec& forcing, const PoincareSetup& setup,
                        const Trajectory* warm_start) {
    const std::size_t steps = period_steps(setup);
    if (setup.mode == PoincareMode::nonlinear) {
        return picard_solve(init, forcing, setup.cfg, steps, warm_start).trajectory;
    }
    return linear_solve(init, forcing, setup, period_dt(forcing, setup), steps);
}

StateVector poincare_map(const StateVector& init, const ForcingSpec& forcing, const PoincareSetup& setup) {
    const auto traj = period_solve(init, forcing, setup);
    return traj[traj.size() - 1];
}

StateVector cesaro_state(std::size_t n, const ForcingSpec& forcing, const PoincareSetup& setup) {
    if (n < 1) throw InvalidArgument("cesaro_state: n must be at least 1");
    if (setup.mode != PoincareMode::linear) throw InvalidArgument("cesaro_state: linear mode only");
    const auto& grid = forcing.F.profile.grid();
    const auto b = poincare_map(StateVector::zeros(grid), forcing, setup);
    const auto ops = duhamel_operators(grid, period_dt(forcing, setup));
    const std::size_t steps = period_steps(setup);
    const Eigen::MatrixXd m_theta = matrix_power(ops->scalar_step(), steps);
    const Eigen::MatrixXd m_u = std::pow(ops->vector_damping(), static_cast<double>(steps)) * m_theta;
    return StateVector(RadialField(grid, cesaro_sum(m_u, b.u.values(), n)),
                       RadialField(grid, cesaro_sum(m_theta, b.theta.values(), n)));
}

PeriodicResult find_periodic_linear(const ForcingSpec& forcing, const PoincareSetup& setup, double tol, int max_iters,
                                    std::size_t cesaro_terms, const StateVector* start) {
    if (setup.mode != PoincareMode::linear) throw InvalidArgument("find_periodic_linear: linear mode only");
    if (!(tol > 0.0)) throw InvalidArgument("periodicity tolerance must be positive");
    const double p = setup.cfg.p;
    StateVector x = start ? *start : StateVector::zeros(forcing.F.profile.grid());
    std::vector<double> defects;
    for (int it = 1; it <= max_iters; ++it) {
        auto traj = period_solve(x, forcing, setup);
        StateVector y = traj[traj.size() - 1];
        defects.push_back(product_norm(y - x, p));
        if (defects.back() <= tol) {
            PeriodicResult res(std::move(traj));
            res.iterations = it;
            res.defect = defects.back();
            res.defects = std::move(defects);
            if (cesaro_terms > 0) {
                res.cesaro = cesaro_state(cesaro_terms, forcing, setup);
                res.cesaro_gap = product_norm(*res.cesaro - x, p);
            }
            return res;
        }
        x = std::move(y);
    }
    std::ostringstream os;
    os << "find_periodic_linear: defect " << defects.back() << " still above " << tol << " after " << max_iters
       << " Poincare iterations";
    throw ConvergenceFailure(os.str());
}

PeriodicResult find_periodic_nonlinear(const ForcingSpec& forcing, const SolverConfig& cfg, double tol, int max_iters) {
    if (!(tol > 0.0)) throw InvalidArgument("periodicity tolerance must be positive");
    const std::size_t steps = static_cast<std::size_t>(cfg.steps_per_period);
    StateVector x = StateVector::zeros(forcing.F.profile.grid());
    std::optional<Trajectory> prev;
    std::vector<double> defects;
    std::vector<int> inner;
    for (int it = 1; it <= max_iters; ++it) {
        auto res = picard_solve(x, forcing, cfg, steps, prev ? &*prev : nullptr);
        inner.push_back(res.report.iterations);
        StateVector y = res.trajectory[steps];
        defects.push_back(product_norm(y - x, cfg.p));
        if (defects.back() <= tol) {
            PeriodicResult out(std::move(res.trajectory));
            out.iterations = it;
            out.defect = defects.back();
            out.defects = std::move(defects);
            out.inner_iterations = std::move(inner);
            return out;
        }
        x = std::move(y);
        prev = std::move(res.trajectory);
    }
    std::ostringstream os;
    os << "find_periodic_nonlinear: defect " << defects.back() << " still above " << tol << " after " << max_iters
       << " Poincare iterations";
    throw ConvergenceFailure(os.str());
}

double check_periodicity(const Trajectory& traj, double T, double p) {
    const std::size_t m = period_nodes(T, traj.dt());
    if (traj.size() < m + 1) throw InvalidArgument("check_periodicity: trajectory horizon shorter than the period");
    double worst = 0.0;
    for (std::size_t k = 0; k + m < traj.size(); ++k) worst = std::max(worst, product_norm(traj[k + m] - traj[k], p));
    return worst;
}

DecayReport uniqueness_experiment(const StateVector& init_a, const StateVector& init_b, const ForcingSpec& forcing,
                                  double horizon, const PoincareSetup& setup, double fit_from) {
    const double dt = period_dt(forcing, setup);
    const std::size_t steps = period_nodes(horizon, dt);
    auto solve = [&](const StateVector& init) {
        if (setup.mode == PoincareMode::nonlinear) return picard_solve(init, forcing, setup.cfg, steps).trajectory;
        return linear_solve(init, forcing, setup, dt, steps);
    };
    const auto a = solve(init_a);
    const auto b = solve(init_b);
    const double p = setup.cfg.p;
    DecayReport rep;
    rep.fit_from = fit_from;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const StateVector diff = a[k] - b[k];
        rep.times.push_back(a.time(k));
        rep.delta_u.push_back(lp_norm(diff.u, p));
        rep.delta_theta.push_back(lp_norm(diff.theta, p));
        rep.delta.push_back(std::max(rep.delta_u.back(), rep.delta_theta.back()));
        rep.max_delta = std::max(rep.max_delta, rep.delta.back());
    }
    rep.rate = fit_rate(rep.times, rep.delta, fit_from);
    rep.rate_u = fit_rate(rep.times, rep.delta_u, fit_from);
    rep.rate_theta = fit_rate(rep.times, rep.delta_theta, fit_from);
    return rep;
}

}  // namespace hypmild
