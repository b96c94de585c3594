#include <doctest.h>

#include "hypmild/error.hpp"
#include "hypmild/estimates.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <numbers>

using namespace hypmild;

namespace {

GridPtr grid3() {
    static auto g = RadialGrid::make({3, 26.0, 32, 8});
    return g;
}

// int_0^inf s^{-theta} e^{-beta s} ds with s = u^{1/(1-theta)}, which removes the singularity at 0
double gamma_oracle(double theta, double beta) {
    const double k = 1.0 / (1.0 - theta);
    boost::math::quadrature::exp_sinh<double> integrator;
    return k * integrator.integrate([&](double u) { return std::exp(-beta * std::pow(u, k)); }, 1e-15);
}

EstimateConstants unit3() { return EstimateConstants{3, 1.0, 1.0, 4.0}; }

}  // namespace

TEST_CASE("h_d") {
    EstimateConstants c = unit3();
    CHECK(h_d(0.25, c) == doctest::Approx(8.0).epsilon(1e-15));
    CHECK(h_d(4.0, c) == 1.0);
    c.d = 2;
    c.C = 2.5;
    CHECK(h_d(1.0, c) == 2.5);
    CHECK(h_d(std::nextafter(1.0, 0.0), c) == doctest::Approx(2.5).epsilon(1e-14));
    CHECK_THROWS_AS(h_d(0.0, c), InvalidArgument);
    CHECK_THROWS_AS(h_d(-1.0, c), InvalidArgument);
}

TEST_CASE("gamma_pq") {
    const auto c = unit3();
    CHECK(gamma_pq(kInf, kInf, c) == 0.0);
    CHECK(gamma_pq(2, 2, c) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gamma_pq(3, 6, c) == doctest::Approx(19.0 / 36.0).epsilon(1e-15));
    CHECK_THROWS_AS(gamma_pq(4, 2, c), InvalidArgument);
    CHECK_THROWS_AS(gamma_pq(0.5, 2, c), InvalidArgument);
    CHECK(gamma_pq(1, 1, c) == 0.0);
    for (double p : {1.0, 1.5, 2.0, 3.0, 4.0, 8.0}) {
        if (p > 1.0) CHECK(gamma_pq(p, p, c) > 0.0);
        for (double q : {p, 2 * p, 4 * p, kInf}) CHECK(gamma_pq(p, q, c) >= 0.0);
    }
}

TEST_CASE("Gamma function values") {
    CHECK(std::tgamma(0.5) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
    CHECK(std::tgamma(1.0) == 1.0);
    CHECK(std::tgamma(0.25) == doctest::Approx(3.6256099082219083).epsilon(1e-12));
}

TEST_CASE("Gamma integral identity") {
    for (auto [theta, beta] : {std::pair{0.75, 2.5}, std::pair{0.875, 2.6875}, std::pair{0.5, 1.0}, std::pair{0.2, 7.0}}) {
        const double oracle = gamma_oracle(theta, beta);
        CHECK(std::abs(gamma_integral(theta, beta) - oracle) <= 1e-10 * oracle);
    }
}

TEST_CASE("linear constant N") {
    const auto c = unit3();
    CHECK(c.gamma_pq(4.0 / 3.0, 4.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(c.beta() == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(c.theta_exp() == 0.75);
    const double n = linear_constant_N(4.0, c);
    CHECK(n == doctest::Approx(3.2834).epsilon(3e-5));
    CHECK(std::abs(n - (gamma_oracle(0.75, 2.5) + 0.4)) < 1e-10);
    CHECK(c.N() == n);

    // decreasing in beta at fixed theta: beta = 2 + delta/2 sweeps [2, 5]
    double prev = HUGE_VAL;
    for (double delta = 0.0; delta <= 6.0; delta += 0.25) {
        EstimateConstants k{3, 1.0, delta == 0.0 ? 1e-12 : delta, 4.0};
        const double nk = linear_constant_N(4.0, k);
        CHECK(nk < prev);
        prev = nk;
    }
    CHECK(linear_constant_N(3.0001, c) > 1e3);
    CHECK_THROWS_WITH_AS(linear_constant_N(3.0, c), doctest::Contains("for p > d"), PreconditionViolation);
    CHECK_THROWS_AS(linear_constant_N(2.0, c), PreconditionViolation);
    CHECK(outside_proof_exponent_range(2.5));
    CHECK_FALSE(outside_proof_exponent_range(3.0));
}

TEST_CASE("smoothing constant M") {
    const auto c = unit3();
    CHECK(c.theta_tilde() == doctest::Approx(0.875).epsilon(1e-15));
    CHECK(c.gamma_pq(4, 4) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(c.gamma_pq(2, 4) == doctest::Approx(0.625).epsilon(1e-15));
    CHECK(c.beta_tilde() == doctest::Approx(2.6875).epsilon(1e-15));
    const double m = smoothing_constant_M(4.0, c);
    CHECK(std::abs(m - (gamma_oracle(0.875, 2.6875) + 1.0 / 2.6875)) < 1e-10);
    for (double p = 3.05; p <= 30.0; p += 0.5) {
        const double mp = smoothing_constant_M(p, c);
        CHECK(std::isfinite(mp));
        CHECK(mp > 0.0);
    }
    CHECK_THROWS_WITH_AS(smoothing_constant_M(3.0, c), doctest::Contains("for p > d"), PreconditionViolation);
}

TEST_CASE("verification reports") {
    const auto c = EstimateConstants{3, 0.7, 0.96, 4.0};
    const auto zero = RadialField::zeros(grid3());
    const auto rz = verify_dispersive(zero, 1.0, 2.0, 4.0, c);
    CHECK(rz.lhs == 0.0);
    CHECK(rz.pass);
    CHECK(verify_smoothing(zero, 1.0, 2.0, 2.0, c).pass);

    const auto f = RadialField::from_function(grid3(), [](double r) { return std::exp(-r * r); });
    const auto a = verify_dispersive(f, 1.0, 2.0, 4.0, c);
    const auto b = verify_dispersive(f * 3.5, 1.0, 2.0, 4.0, c);
    CHECK(b.ratio == doctest::Approx(a.ratio).epsilon(1e-12));
    CHECK(a.ratio_u < 1.0);
    CHECK_THROWS_AS(verify_smoothing(f, 1.0, 1.0, 2.0, c), InvalidArgument);
    CHECK_THROWS_AS(verify_smoothing(f, 1.0, 2.0, kInf, c), InvalidArgument);
    CHECK_THROWS_AS(verify_dispersive(f, 1.0, 4.0, 2.0, c), InvalidArgument);

    // velocity slot decays at least like e^{-(d-1)t}
    const double l05 = verify_dispersive(StateVector(f, zero), 0.5, 2, 2, c).lhs;
    for (double t : {1.0, 2.0, 4.0}) {
        const double lt = verify_dispersive(StateVector(f, zero), t, 2, 2, c).lhs;
        CHECK(lt <= std::exp(-2.0 * (t - 0.5)) * l05);
    }
    // large t: smoothing output vanishes relative to the input
    CHECK(verify_smoothing(StateVector(f, zero), 8.0, 2.0, 2.0, c).lhs < 1e-6 * lp_norm(f, 2.0));
}

TEST_CASE("fit_constants properties") {
    const auto lib = sample_library(grid3());
    const std::vector<double> ts{0.25, 1.0, 4.0};
    FitOptions opt;

    const std::vector<Sample> one{lib[0]};
    const auto single = fit_constants(one, ts, {{2.0, 2.0}}, opt);
    CHECK(single.worst_ratio <= 1.0);
    CHECK(single.worst_ratio >= 0.9 - 1e-12);

    std::vector<Sample> doubled = lib;
    for (auto& s : doubled) s.field *= 2.0;
    const std::vector<ExponentPair> pq{{2, 2}, {2, 4}, {4, 4}};
    const auto base = fit_constants(lib, ts, pq, opt);
    const auto twice = fit_constants(doubled, ts, pq, opt);
    CHECK(twice.constants.C == doctest::Approx(base.constants.C).epsilon(1e-10));
    CHECK(twice.constants.delta_d == doctest::Approx(base.constants.delta_d).epsilon(1e-10));

    const auto fine = fit_constants(lib, {0.25, 0.5, 1.0, 2.0, 4.0}, pq, opt);
    CHECK(base.constants.delta_d >= 0.95 * fine.constants.delta_d);
    CHECK(fine.constants.delta_d >= 0.95 * base.constants.delta_d);

    for (const auto& tup : base.tuples) CHECK(tup.ratio <= 0.9 + 1e-12);

    // the product slot carries the bare heat flow of theta, which no (C, delta_d) can bound at rate d - 1
    FitOptions product = opt;
    product.slot = Slot::product;
    CHECK_THROWS_AS(fit_constants(lib, ts, {{1.0, 1.0}}, product), InfeasibleFit);
}
