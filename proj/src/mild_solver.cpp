#include "hypmild/mild_solver.hpp"

#include "hypmild/error.hpp"
#include "hypmild/quadrature.hpp"
#include "hypmild/semigroup.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace hypmild {

namespace {

constexpr int kLagOrder = 4;

const RadialField* at(const std::vector<RadialField>& v, std::size_t k) { return v.empty() ? nullptr : &v[k]; }

void require_length(const std::vector<RadialField>& v, std::size_t steps) {
    if (!v.empty() && v.size() < steps + 1) {
        throw InvalidArgument("Duhamel sources shorter than the time grid");
    }
}

Eigen::VectorXd apply_pair(const Eigen::MatrixXd& a_new, const Eigen::MatrixXd& a_old, const RadialField* g_new,
                           const RadialField* g_old, Eigen::Index n) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    if (g_new) out.noalias() += a_new * g_new->values();
    if (g_old) out.noalias() += a_old * g_old->values();
    return out;
}

void require_supercritical(double p, int d) {
    if (!(p > d)) {
        std::ostringstream os;
        os << "solver exponent p = " << p << " is not admissible: the estimates hold only for p > d = " << d;
        throw PreconditionViolation(os.str());
    }
}

}  // namespace

DuhamelOperators::DuhamelOperators(GridPtr grid, double dt) : grid_(std::move(grid)), dt_(dt) {
    if (!(dt > 0.0)) throw InvalidArgument("DuhamelOperators: time step must be positive");
    const int d = grid_->dimension();
    const auto n = static_cast<Eigen::Index>(grid_->size());
    damp_ = std::exp(-(d - 1) * dt);
    s_dt_ = semigroup_matrices(grid_, dt)->smoothing();
    vec_new_ = vec_old_ = vec_div_new_ = vec_div_old_ = sca_div_new_ = sca_div_old_ = Eigen::MatrixXd::Zero(n, n);
    const auto rule = gauss_legendre(kLagOrder, 0.0, dt);
    for (int m = 0; m < kLagOrder; ++m) {
        const double tau = rule.nodes[m];
        const double w_new = rule.weights[m] * (1.0 - tau / dt);
        const double w_old = rule.weights[m] * (tau / dt);
        const double damp = std::exp(-(d - 1) * tau);
        const auto ops = semigroup_matrices(grid_, tau);
        vec_new_ += (w_new * damp) * ops->smoothing();
        vec_old_ += (w_old * damp) * ops->smoothing();
        vec_div_new_ += (w_new * damp) * ops->divergence();
        vec_div_old_ += (w_old * damp) * ops->divergence();
        sca_div_new_ += w_new * ops->divergence();
        sca_div_old_ += w_old * ops->divergence();
    }
}

StateVector DuhamelOperators::step(const StateVector& prev, const Sources& src, std::size_t k) const {
    const auto n = static_cast<Eigen::Index>(grid_->size());
    Eigen::VectorXd u = damp_ * (s_dt_ * prev.u.values());
    u += apply_pair(vec_new_, vec_old_, at(src.u_plain, k), at(src.u_plain, k - 1), n);
    u += apply_pair(vec_div_new_, vec_div_old_, at(src.u_div, k), at(src.u_div, k - 1), n);
    Eigen::VectorXd th = s_dt_ * prev.theta.values();
    th += apply_pair(sca_div_new_, sca_div_old_, at(src.theta_div, k), at(src.theta_div, k - 1), n);
    return StateVector(RadialField(grid_, std::move(u)), RadialField(grid_, std::move(th)));
}

Trajectory DuhamelOperators::propagate(const StateVector& init, const Sources& src, std::size_t steps) const {
    if (init.grid() != grid_) throw GridMismatch("propagate: initial state on a different grid");
    require_length(src.u_plain, steps);
    require_length(src.u_div, steps);
    require_length(src.theta_div, steps);
    std::vector<StateVector> states;
    states.reserve(steps + 1);
    states.push_back(init);
    for (std::size_t k = 1; k <= steps; ++k) {
        states.push_back(step(states.back(), src, k));
    }
    return Trajectory(dt_, std::move(states));
}

DuhamelPtr duhamel_operators(const GridPtr& grid, double dt) {
    static std::mutex mutex;
    static std::map<std::pair<const RadialGrid*, std::uint64_t>, DuhamelPtr> cache;
    const auto key = std::make_pair(grid.get(), std::bit_cast<std::uint64_t>(dt));
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    auto ops = std::make_shared<const DuhamelOperators>(grid, dt);
    std::lock_guard lock(mutex);
    return cache.emplace(key, ops).first->second;
}

double solver_dt(const ForcingSpec& forcing, const SolverConfig& cfg) {
    if (cfg.steps_per_period < 1) throw InvalidArgument("steps_per_period must be >= 1");
    return forcing.period / cfg.steps_per_period;
}

std::vector<RadialField> sample_in_time(const ModulatedField& m, double dt, std::size_t steps) {
    std::vector<RadialField> out;
    out.reserve(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) out.push_back(m.at(dt * static_cast<double>(k)));
    return out;
}

namespace {

std::size_t node_index(double t, double dt) {
    const double x = t / dt;
    const double k = std::round(x);
    if (k < 0 || std::abs(x - k) > 1e-9 * std::max(1.0, k)) {
        throw GridMismatch("time " + std::to_string(t) + " is not on the solver time grid");
    }
    return static_cast<std::size_t>(k);
}

std::vector<RadialField> products(const Trajectory& a, const Trajectory& b, bool with_theta, double sign) {
    std::vector<RadialField> out;
    out.reserve(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        out.push_back((a[k].u * (with_theta ? b[k].theta : b[k].u)) * sign);
    }
    return out;
}

void require_compatible(const Trajectory& a, const Trajectory& b) {
    if (a.size() != b.size() || a.dt() != b.dt() || a.grid() != b.grid()) {
        throw GridMismatch("trajectories on different time or space grids");
    }
}

}  // namespace

StateVector op_T_h(const Trajectory& eta, const ModulatedField& h, double t) {
    const std::size_t k = eta.index_of(t);
    const auto hs = sample_in_time(h, eta.dt(), k);
    DuhamelOperators::Sources src;
    for (std::size_t j = 0; j <= k; ++j) src.u_plain.push_back(eta[j].theta * hs[j]);
    return duhamel_operators(eta.grid(), eta.dt())->propagate(StateVector::zeros(eta.grid()), src, k)[k];
}

StateVector op_T_ext(const ForcingSpec& forcing, double dt, double t) {
    const std::size_t k = node_index(t, dt);
    const auto& grid = forcing.F.profile.grid();
    DuhamelOperators::Sources src;
    src.u_div = sample_in_time(forcing.F, dt, k);
    src.theta_div = sample_in_time(forcing.f, dt, k);
    return duhamel_operators(grid, dt)->propagate(StateVector::zeros(grid), src, k)[k];
}

StateVector op_B(const Trajectory& a, const Trajectory& b, double t) {
    require_compatible(a, b);
    const std::size_t k = a.index_of(t);
    DuhamelOperators::Sources src;
    src.u_div = products(a, b, false, -1.0);
    src.theta_div = products(a, b, true, -1.0);
    return duhamel_operators(a.grid(), a.dt())->propagate(StateVector::zeros(a.grid()), src, k)[k];
}

namespace {

DuhamelOperators::Sources full_sources(const Trajectory& traj, const ForcingSpec& forcing) {
    const std::size_t steps = traj.size() - 1;
    const auto F = sample_in_time(forcing.F, traj.dt(), steps);
    const auto f = sample_in_time(forcing.f, traj.dt(), steps);
    const auto h = sample_in_time(forcing.h, traj.dt(), steps);
    DuhamelOperators::Sources src;
    for (std::size_t k = 0; k <= steps; ++k) {
        const auto& x = traj[k];
        src.u_plain.push_back(x.theta * h[k]);
        src.u_div.push_back(F[k] - x.u * x.u);
        src.theta_div.push_back(f[k] - x.u * x.theta);
    }
    return src;
}

}  // namespace

Trajectory mild_map(const StateVector& init, const Trajectory& traj, const ForcingSpec& forcing) {
    const auto src = full_sources(traj, forcing);
    return duhamel_operators(traj.grid(), traj.dt())->propagate(init, src, traj.size() - 1);
}

StateVector duhamel_rhs(const StateVector& init, const Trajectory& traj, const ForcingSpec& forcing, double t) {
    const std::size_t k = traj.index_of(t);
    if (k == 0) return init;
    const auto& grid = traj.grid();
    const double dt = traj.dt();
    const int d = grid->dimension();
    const auto src = full_sources(traj, forcing);
    const auto ops = duhamel_operators(grid, dt);
    const auto n = static_cast<Eigen::Index>(grid->size());
    // contribution of step j, propagated over the remaining lag (k - j) dt
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd th = Eigen::VectorXd::Zero(n);
    for (std::size_t j = 1; j <= k; ++j) {
        const StateVector zero = StateVector::zeros(grid);
        const StateVector inc = ops->step(zero, src, j);
        const std::size_t lag = k - j;
        if (lag == 0) {
            u += inc.u.values();
            th += inc.theta.values();
        } else {
            const double tau = dt * static_cast<double>(lag);
            const auto& s = semigroup_matrices(grid, tau)->smoothing();
            u += std::exp(-(d - 1) * tau) * (s * inc.u.values());
            th += s * inc.theta.values();
        }
    }
    StateVector out(RadialField(grid, std::move(u)), RadialField(grid, std::move(th)));
    out += apply_matrix_semigroup(t, init);
    return out;
}

Trajectory solve_linear(const StateVector& init, const ForcingSpec& forcing, const Trajectory& eta_traj) {
    const std::size_t steps = eta_traj.size() - 1;
    const double dt = eta_traj.dt();
    const auto h = sample_in_time(forcing.h, dt, steps);
    DuhamelOperators::Sources src;
    for (std::size_t k = 0; k <= steps; ++k) src.u_plain.push_back(eta_traj[k].theta * h[k]);
    src.u_div = sample_in_time(forcing.F, dt, steps);
    src.theta_div = sample_in_time(forcing.f, dt, steps);
    return duhamel_operators(init.grid(), dt)->propagate(init, src, steps);
}

Trajectory solve_linear(const StateVector& init, const ForcingSpec& forcing, double dt, std::size_t steps) {
    DuhamelOperators::Sources src;
    src.u_div = sample_in_time(forcing.F, dt, steps);
    src.theta_div = sample_in_time(forcing.f, dt, steps);
    return duhamel_operators(init.grid(), dt)->propagate(init, src, steps);
}

double linear_bound(const StateVector& init, const ForcingSpec& forcing, double eta_norm, const EstimateConstants& c) {
    const double p = c.p;
    return std::max(c.C, 1.0) * product_norm(init, p) + c.N() * forcing.h.sup_norm(p / 2.0) * eta_norm +
           c.M() * forcing.pair_norm(p / 2.0);
}

double contraction_margin(const ForcingSpec& forcing, const SolverConfig& cfg) {
    const auto& c = cfg.constants;
    return 2.0 * c.M() * cfg.rho + c.N() * forcing.h.sup_norm(cfg.p / 2.0);
}

double rho_for_margin(double target, const ForcingSpec& forcing, const SolverConfig& cfg) {
    const auto& c = cfg.constants;
    const double rest = target - c.N() * forcing.h.sup_norm(cfg.p / 2.0);
    if (!(rest > 0.0)) {
        throw PreconditionViolation("rho_for_margin: N |h| already exceeds the target margin");
    }
    return rest / (2.0 * c.M());
}

void check_picard_hypotheses(const StateVector& init, const ForcingSpec& forcing, const SolverConfig& cfg,
                             ConvergenceReport& report) {
    const auto& c = cfg.constants;
    require_supercritical(cfg.p, init.grid()->dimension());
    if (c.p != cfg.p) throw InvalidArgument("picard: constants evaluated at a different exponent p");
    const double h_norm = forcing.h.sup_norm(cfg.p / 2.0);
    report.margin = contraction_margin(forcing, cfg);
    report.ball_lhs = product_norm(init, cfg.p) + c.M() * (cfg.rho * cfg.rho + forcing.pair_norm(cfg.p / 2.0)) +
                      c.N() * h_norm * cfg.rho;
    if (!(report.margin < 1.0)) {
        std::ostringstream os;
        os << "contraction margin 2 M rho + N |h| = " << report.margin << " >= 1; need rho < "
           << (1.0 - c.N() * h_norm) / (2.0 * c.M()) << " and N |h| < 1";
        throw PreconditionViolation(os.str());
    }
    if (!(report.ball_lhs <= cfg.rho)) {
        std::ostringstream os;
        os << "ball condition |init| + M(rho^2 + |(F,f)|) + N |h| rho <= rho fails: " << report.ball_lhs << " > "
           << cfg.rho;
        throw PreconditionViolation(os.str());
    }
}

PicardResult picard_solve(const StateVector& init, const ForcingSpec& forcing, const SolverConfig& cfg,
                          std::size_t steps, const Trajectory* warm_start) {
    ConvergenceReport report;
    check_picard_hypotheses(init, forcing, cfg, report);
    const double dt = solver_dt(forcing, cfg);
    const auto ops = duhamel_operators(init.grid(), dt);
    Trajectory x = warm_start ? *warm_start : ops->propagate(init, {}, steps);
    if (x.size() != steps + 1 || x.dt() != dt) throw GridMismatch("picard: warm start on a different time grid");
    report.max_iterate_norm = sup_norm(x, cfg.p);
    for (int it = 1; it <= cfg.max_iters; ++it) {
        Trajectory next = mild_map(init, x, forcing);
        const double diff = sup_distance(next, x, cfg.p);
        const double norm = sup_norm(next, cfg.p);
        report.max_iterate_norm = std::max(report.max_iterate_norm, norm);
        if (!report.diffs.empty() && report.diffs.back() > 0.0) {
            report.ratios.push_back(diff / report.diffs.back());
        }
        report.diffs.push_back(diff);
        report.iterations = it;
        x = std::move(next);
        const double rel = diff == 0.0 ? 0.0 : diff / norm;
        if (rel < cfg.picard_tol) {
            report.converged = true;
            return {std::move(x), std::move(report)};
        }
    }
    std::ostringstream os;
    os << "picard: no convergence in " << cfg.max_iters << " iterations; last ratios";
    for (std::size_t k = report.ratios.size() > 5 ? report.ratios.size() - 5 : 0; k < report.ratios.size(); ++k) {
        os << ' ' << report.ratios[k];
    }
    throw ConvergenceFailure(os.str());
}

}  // namespace hypmild
