#include <doctest.h>

#include "hypmild/error.hpp"
#include "hypmild/mild_solver.hpp"
#include "hypmild/quadrature.hpp"
#include "hypmild/semigroup.hpp"

#include <cmath>
#include <numbers>

using namespace hypmild;

namespace {

GridPtr grid3() {
    static auto g = RadialGrid::make({3, 26.0, 32, 8});
    return g;
}

RadialField gauss(double a) {
    return RadialField::from_function(grid3(), [a](double r) { return a * std::exp(-r * r); });
}

// even in r, so smooth at the origin, peaked near r = c
RadialField ring(double a, double c) {
    return RadialField::from_function(grid3(), [a, c](double r) { return a * std::exp(-0.25 * std::pow(r * r - c * c, 2)); });
}

Trajectory constant_trajectory(const StateVector& s, double dt, std::size_t steps) {
    return Trajectory(dt, std::vector<StateVector>(steps + 1, s));
}

// int_0^t w(s) e^{-a(t-s)} S(t-s) g ds by composite Gauss-Legendre in s with fresh semigroup matrices
RadialField lag_quadrature(const RadialField& g, double t, double damping, const std::function<double(double)>& w,
                           bool divergence) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size()));
    const int panels = 8;
    for (int k = 0; k < panels; ++k) {
        const auto rule = gauss_legendre(12, t * k / panels, t * (k + 1) / panels);
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            const double lag = t - rule.nodes[j];
            const auto ops = semigroup_matrices(g.grid(), lag);
            const auto& m = divergence ? ops->divergence() : ops->smoothing();
            acc += rule.weights[j] * w(rule.nodes[j]) * std::exp(-damping * lag) * (m * g.values());
        }
    }
    return RadialField(g.grid(), acc);
}

}  // namespace

TEST_CASE("T_h with time-constant data against lag quadrature") {
    const double dt = 1.0 / 32;
    const auto eta = constant_trajectory(StateVector(gauss(0.0), gauss(0.3)), dt, 32);
    const ModulatedField h{ring(0.5, 1.0), Waveform::constant(1.0)};
    const auto out = op_T_h(eta, h, 1.0);
    const auto oracle = lag_quadrature(gauss(0.3) * ring(0.5, 1.0), 1.0, 2.0, [](double) { return 1.0; }, false);
    CHECK(lp_norm(out.u - oracle, 4.0) < 1e-8 * lp_norm(oracle, 4.0));
    CHECK(lp_norm(out.theta, kInf) == 0.0);
}

TEST_CASE("T_ext with sinusoidal forcing converges at second order in dt") {
    const double T = 1.0;
    const Waveform w(T, 0.0, {}, {1.0});
    ForcingSpec forcing{{gauss(0.2), w}, {ring(0.1, 1.0), w}, {RadialField::zeros(grid3()), w}, T};
    auto wave = [T](double s) { return std::sin(2 * std::numbers::pi * s / T); };
    const auto ou = lag_quadrature(gauss(0.2), 0.75, 2.0, wave, true);
    const auto ot = lag_quadrature(ring(0.1, 1.0), 0.75, 0.0, wave, true);
    double errs[2];
    int i = 0;
    for (double dt : {1.0 / 32, 1.0 / 64}) {
        const auto s = op_T_ext(forcing, dt, 0.75);
        errs[i++] = std::max(lp_norm(s.u - ou, 4.0) / lp_norm(ou, 4.0), lp_norm(s.theta - ot, 4.0) / lp_norm(ot, 4.0));
    }
    CHECK(errs[1] < 2e-3);
    CHECK(errs[0] / errs[1] > 3.5);
}

TEST_CASE("linearity and bilinearity") {
    const double dt = 1.0 / 16;
    const Waveform w(1.0, 0.2, {0.5}, {});
    ForcingSpec forcing{{gauss(0.2), w}, {ring(0.1, 1.0), w}, {gauss(0.3), w}, 1.0};
    ForcingSpec doubled = forcing;
    doubled.F.profile *= 2.0;
    doubled.f.profile *= 2.0;
    const auto one = op_T_ext(forcing, dt, 0.5);
    const auto two = op_T_ext(doubled, dt, 0.5);
    CHECK(product_norm(two - 2.0 * one, kInf) <= 1e-12 * product_norm(one, kInf));

    const auto a = constant_trajectory(StateVector(gauss(0.2), gauss(0.1)), dt, 16);
    const auto b = constant_trajectory(StateVector(ring(0.1, 1.0), gauss(0.3)), dt, 16);
    const auto zero = constant_trajectory(StateVector::zeros(grid3()), dt, 16);
    const auto bab = op_B(a, b, 1.0);
    CHECK(product_norm(op_B(zero, b, 1.0), kInf) == 0.0);
    CHECK(product_norm(op_B(a, zero, 1.0), kInf) == 0.0);
    Trajectory a2 = a, b3 = b;
    for (std::size_t k = 0; k < a2.size(); ++k) {
        a2[k] *= 2.0;
        b3[k] *= 3.0;
    }
    CHECK(product_norm(op_B(a2, b3, 1.0) - 6.0 * bab, kInf) <= 1e-10 * product_norm(bab, kInf));
    CHECK_THROWS_AS(op_B(a, b, 0.51), GridMismatch);
}

TEST_CASE("pure initial data follows the matrix semigroup") {
    const StateVector init(gauss(1.0), ring(0.5, 1.0));
    const auto forcing = ForcingSpec::zeros(grid3());
    const auto traj = solve_linear(init, forcing, 1.0 / 32, 64);
    double prev = product_norm(init, 4.0);
    for (std::size_t k : {8u, 32u, 64u}) {
        const auto direct = apply_matrix_semigroup(traj.time(k), init);
        CHECK(product_norm(traj[k] - direct, 2.0) < 1e-6);
    }
    for (std::size_t k = 1; k < traj.size(); ++k) {
        const double now = product_norm(traj[k], 4.0);
        CHECK(now <= prev * (1 + 1e-12));
        prev = now;
    }
    const auto zero = solve_linear(StateVector::zeros(grid3()), forcing, 1.0 / 32, 8);
    CHECK(sup_norm(zero, kInf) == 0.0);
}

TEST_CASE("recurrence agrees with the direct convolution sum") {
    const double dt = 1.0 / 16;
    const Waveform w(1.0, 0.0, {}, {1.0});
    ForcingSpec forcing{{gauss(0.2), w}, {ring(0.1, 1.0), w}, {gauss(0.3), w}, 1.0};
    const StateVector init(gauss(0.1), ring(0.2, 0.5));
    const auto eta = constant_trajectory(StateVector(gauss(0.0), gauss(0.2)), dt, 16);
    const auto traj = solve_linear(init, forcing, eta);
    CHECK(product_norm(duhamel_rhs(init, eta, forcing, 0.0) - init, kInf) == 0.0);
    // the direct sum uses the nonlinear map; feed it a trajectory with zero velocity so B vanishes
    for (double t : {0.25, 1.0}) {
        const auto rhs = duhamel_rhs(init, eta, forcing, t);
        CHECK(product_norm(traj[eta.index_of(t)] - rhs, 4.0) < 1e-6);
    }
}

TEST_CASE("picard: zero data, contraction and residual") {
    EstimateConstants c{3, 0.7, 0.96, 4.0};
    SolverConfig cfg;
    cfg.constants = c;
    cfg.steps_per_period = 16;
    const auto zero_forcing = ForcingSpec::zeros(grid3());
    cfg.rho = rho_for_margin(0.5, zero_forcing, cfg);
    auto res0 = picard_solve(StateVector::zeros(grid3()), zero_forcing, cfg, 16);
    CHECK(res0.report.iterations == 1);
    CHECK(sup_norm(res0.trajectory, kInf) == 0.0);

    const Waveform w(1.0, 0.0, {}, {1.0});
    ForcingSpec forcing{{gauss(5e-4), w}, {ring(5e-4, 1.0), w}, {gauss(5e-4), w}, 1.0};
    cfg.rho = rho_for_margin(0.5, forcing, cfg);
    const StateVector init(gauss(1e-3), gauss(1e-3));
    auto res = picard_solve(init, forcing, cfg, 16);
    CHECK(res.report.converged);
    CHECK(res.report.margin == doctest::Approx(0.5));
    for (double r : res.report.ratios) CHECK(r <= res.report.margin + 1e-3);
    const auto phi = mild_map(init, res.trajectory, forcing);
    CHECK(sup_distance(phi, res.trajectory, 4.0) <= cfg.picard_tol * (1 + sup_norm(res.trajectory, 4.0)));
    CHECK(res.report.max_iterate_norm <= cfg.rho);

    cfg.rho = 1.0;
    CHECK_THROWS_AS(picard_solve(init, forcing, cfg, 16), PreconditionViolation);
    cfg.p = 3.0;
    CHECK_THROWS_AS(picard_solve(init, forcing, cfg, 16), PreconditionViolation);
}
