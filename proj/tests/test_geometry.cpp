#include <doctest.h>

#include "hypmild/error.hpp"
#include "hypmild/geometry.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace hypmild;
using std::numbers::pi;

TEST_CASE("volume weight matches polar density") {
    CHECK(volume_weight(1.0, 2) == doctest::Approx(2 * pi * std::sinh(1.0)).epsilon(1e-14));
    CHECK(volume_weight(1.0, 3) == doctest::Approx(4 * pi * std::sinh(1.0) * std::sinh(1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(volume_weight(1.0, 1), InvalidArgument);
}

TEST_CASE("ball volume from grid weights") {
    for (int d : {2, 3, 4, 5}) {
        auto grid = RadialGrid::make({d, 1.0, 4, 8});
        double vol = 0;
        for (double w : grid->volume_weights()) vol += w;
        CHECK(vol == doctest::Approx(hyperbolic_ball_volume(1.0, d)).epsilon(1e-10));
    }
    // d = 4: area(S^3) = 2 pi^2, int sinh^3 = cosh^3/3 - cosh + 2/3
    const double c = std::cosh(1.5);
    CHECK(hyperbolic_ball_volume(1.5, 4) ==
          doctest::Approx(2 * pi * pi * (c * c * c / 3 - c + 2.0 / 3)).epsilon(1e-12));
}

TEST_CASE("lp norm of an indicator and of a gaussian") {
    auto grid = RadialGrid::make({2, 8.0, 64, 8});
    auto ind = RadialField::from_function(grid, [](double r) { return r <= 1.0 ? 1.0 : 0.0; });
    CHECK(lp_norm(ind, 1.0) == doctest::Approx(2 * pi * (std::cosh(1.0) - 1)).epsilon(1e-12));

    auto g3 = RadialGrid::make({3, 12.0, 64, 8});
    auto f = RadialField::from_function(g3, [](double r) { return std::exp(-r * r); });
    auto integrand = [](double r) { return std::exp(-2 * r * r) * 4 * pi * std::sinh(r) * std::sinh(r); };
    const double oracle = std::sqrt(boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        integrand, 0.0, 12.0, 15, 1e-14));
    CHECK(lp_norm(f, 2.0) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(lp_norm(f, kInf) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK_THROWS_AS(lp_norm(f, 0.5), InvalidArgument);
}

TEST_CASE("laplacian and divergence on exact profiles") {
    auto g3 = RadialGrid::make({3, 6.0, 48, 10});
    auto lap = radial_laplacian(RadialField::from_function(g3, [](double r) { return std::cosh(r); }));
    auto nodes = g3->nodes();
    double err = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        err = std::max(err, std::abs(lap[i] - 3 * std::cosh(nodes[i])) / std::cosh(nodes[i]));
    }
    CHECK(err < 1e-8);

    auto g2 = RadialGrid::make({2, 4.0, 32, 8});
    auto lap2 = radial_laplacian(RadialField::from_function(g2, [](double r) { return r * r; }));
    // r^2 on H^2: 2 + 2 r coth r, tends to 4 at the origin
    auto n2 = g2->nodes();
    CHECK(lap2[0] == doctest::Approx(2 + 2 * n2[0] / std::tanh(n2[0])).epsilon(1e-9));
    CHECK(lap2[0] == doctest::Approx(4.0).epsilon(1e-3));

    auto div0 = radial_divergence(RadialField::from_function(g3, [](double r) { return std::pow(std::sinh(r), -2); }));
    double rel = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i] < 1.0) continue;
        rel = std::max(rel, std::abs(div0[i]) * std::sinh(nodes[i]) * std::sinh(nodes[i]));
    }
    CHECK(rel < 1e-6);

    auto div_r = radial_divergence(RadialField::from_function(g2, [](double r) { return r; }));
    for (std::size_t i = 0; i < n2.size(); ++i) {
        CHECK(div_r[i] == doctest::Approx(1 + n2[i] / std::tanh(n2[i])).epsilon(1e-10));
    }
    CHECK(1 + 1 / std::tanh(1.0) == doctest::Approx(2.3130).epsilon(1e-4));

    auto tiny = RadialGrid::make({3, 1.0, 1, 4});
    CHECK_THROWS_AS(radial_laplacian(RadialField::zeros(tiny)), InvalidArgument);
}

TEST_CASE("geodesic distance") {
    CHECK(geodesic_distance(1.0, 1.0, 0.0) == doctest::Approx(0.0));
    CHECK(geodesic_distance(1.0, 2.0, pi) == doctest::Approx(3.0).epsilon(1e-13));
    const double c = std::cosh(1.0);
    const double s = std::sinh(1.0);
    const double oracle = std::acosh(c * c - s * s * std::cos(pi / 2));
    CHECK(geodesic_distance(1.0, 1.0, pi / 2) == doctest::Approx(oracle).epsilon(1e-13));
    CHECK(oracle == doctest::Approx(1.51337).epsilon(1e-5));
    CHECK(geodesic_distance(1e-9, 2e-9, 0.0) == doctest::Approx(1e-9).epsilon(1e-6));
}

TEST_CASE("triangle and Hoelder inequalities on random fields") {
    auto grid = RadialGrid::make({3, 8.0, 16, 8});
    std::mt19937 rng(7);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd a(grid->size()), b(grid->size());
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            const double decay = std::exp(-grid->nodes()[static_cast<std::size_t>(i)]);
            a[i] = nd(rng) * decay;
            b[i] = nd(rng) * decay;
        }
        RadialField fa(grid, a), fb(grid, b);
        for (double p : {1.0, 1.5, 2.0, 4.0, kInf}) {
            CHECK(lp_norm(fa + fb, p) <= lp_norm(fa, p) + lp_norm(fb, p) + 1e-12);
        }
        CHECK(lp_norm(fa * fb, 1.0) <= lp_norm(fa, 3.0) * lp_norm(fb, 1.5) * (1 + 1e-12));
    }
}

TEST_CASE("grid mismatch is rejected") {
    auto g1 = RadialGrid::make({3, 8.0, 8, 8});
    auto g2 = RadialGrid::make({3, 8.0, 8, 8});
    CHECK_THROWS_AS(RadialField::zeros(g1) + RadialField::zeros(g2), GridMismatch);
    CHECK_THROWS_AS(RadialGrid::make({1, 8.0, 8, 8}), InvalidArgument);
}
