#include <doctest.h>

#include "hypmild/error.hpp"
#include "hypmild/geometry.hpp"
#include "hypmild/heat_kernel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

using namespace hypmild;
using std::numbers::pi;

namespace {

double gk(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}

// H^2 kernel straight from its integral form, endpoint singularity left to tanh-sinh
double oracle_h2(double t, double r) {
    boost::math::quadrature::tanh_sinh<double> ts;
    // xc is the signed distance to the nearest endpoint, which keeps s - r exact near s = r
    auto f = [&](double s, double xc) {
        const double gap = (xc < 0 && s - r < 1) ? -xc : s - r;
        const double g = 2 * std::sinh(0.5 * (s + r)) * std::sinh(0.5 * gap);
        return g <= 0 ? 0.0 : s * std::exp(-s * s / (4 * t)) / std::sqrt(g);
    };
    const double upper = r + 12 * std::sqrt(t) + 2;
    return std::sqrt(2.0) * std::exp(-t / 4) * std::pow(4 * pi * t, -1.5) * ts.integrate(f, r, upper, 1e-14);
}

// H^4 kernel: one integration by parts moves the r-derivative under the integral
double oracle_h4(double t, double r) {
    boost::math::quadrature::tanh_sinh<double> ts;
    auto minus_gprime = [&](double s) {
        const double q = s < 1e-4 ? s * s / 3 : s / std::tanh(s) - 1;
        const double sh = s < 1e-8 ? 1e-8 : std::sinh(s);
        return std::exp(-s * s / (4 * t)) * (q + s * s / (2 * t)) / sh;
    };
    auto f = [&](double s, double xc) {
        const double gap = (xc < 0 && s - r < 1) ? -xc : s - r;
        const double g = 2 * std::sinh(0.5 * (s + r)) * std::sinh(0.5 * gap);
        return g <= 0 ? 0.0 : minus_gprime(s) / std::sqrt(g);
    };
    const double upper = r + 12 * std::sqrt(t) + 2;
    const double c = std::sqrt(2.0) * std::exp(-t / 4) * std::pow(4 * pi * t, -1.5);
    return std::exp(-2 * t) / (2 * pi) * c * ts.integrate(f, r, upper, 1e-14);
}

// H^5 kernel: the r-derivative of the H^3 closed form done by hand
double oracle_h5(double t, double r) {
    double q;
    if (r < 0.1) {
        const double x2 = r * r;
        q = x2 / 3 - x2 * x2 / 45 + 2 * std::pow(r, 6) / 945 - std::pow(r, 8) / 4725 + 2 * std::pow(r, 10) / 93555;
    } else {
        q = r / std::tanh(r) - 1;
    }
    const double sh2 = r < 1e-300 ? 1.0 : std::sinh(r) * std::sinh(r);
    const double body = r < 1e-8 ? (1.0 / 3 + 1 / (2 * t)) : (q + r * r / (2 * t)) / sh2;
    return std::pow(4 * pi * t, -1.5) * std::exp(-4 * t) / (2 * pi) * std::exp(-r * r / (4 * t)) * body;
}

}  // namespace

TEST_CASE("closed form on H^3") {
    CHECK(kernel_h3(1.0, 0.0) == doctest::Approx(std::pow(4 * pi, -1.5) * std::exp(-1.0)).epsilon(1e-14));
    CHECK(kernel_h3(1.0, 0.0) == doctest::Approx(8.2586e-3).epsilon(1e-4));
    CHECK(std::abs(kernel_h3(1.0, 1e-8) - kernel_h3(1.0, 0.0)) < 1e-12);
    const double mass = gk([](double r) { return kernel_h3(1.0, r) * 4 * pi * std::sinh(r) * std::sinh(r); }, 0, 40);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_THROWS_AS(kernel_h3(0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(kernel_h3(-1.0, 1.0), InvalidArgument);
}

TEST_CASE("integral form on H^2") {
    for (double t : {0.05, 0.5, 1.0, 3.0}) {
        for (double r : {0.0, 1e-6, 1e-3, 0.1, 1.0, 3.0, 8.0}) {
            CAPTURE(t);
            CAPTURE(r);
            CHECK(kernel_h2(t, r) == doctest::Approx(oracle_h2(t, r)).epsilon(1e-10));
        }
    }
    CHECK(kernel_h2(0.5, 3.0) > 0);
    const double mass = gk([](double r) { return kernel_h2(1.0, r) * 2 * pi * std::sinh(r); }, 0, 30);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-7));
    double prev = kernel_h2(1.0, 0.0);
    bool decreasing = true;
    for (int k = 1; k <= 400; ++k) {
        const double v = kernel_h2(1.0, 0.05 * k);
        decreasing = decreasing && v < prev;
        prev = v;
    }
    CHECK(decreasing);
    CHECK_THROWS_AS(kernel_h2(0.0, 1.0), InvalidArgument);
}

TEST_CASE("descent relation against independent forms") {
    CHECK(kernel_recursion(5, 1.0, 1.0) == doctest::Approx(oracle_h5(1.0, 1.0)).epsilon(1e-8));
    for (double t : {0.1, 1.0, 2.5}) {
        for (double r : {0.0, 5e-4, 1e-3, 0.05, 0.5, 2.0, 6.0}) {
            CAPTURE(t);
            CAPTURE(r);
            CHECK(kernel_recursion(5, t, r) == doctest::Approx(oracle_h5(t, r)).epsilon(1e-8));
            CHECK(kernel_recursion(4, t, r) == doctest::Approx(oracle_h4(t, r)).epsilon(1e-8));
        }
    }
    const double m4 = gk([](double r) { return kernel_recursion(4, 1.0, r) * sphere_area(3) * std::pow(std::sinh(r), 3); }, 0, 30);
    CHECK(m4 == doctest::Approx(1.0).epsilon(1e-6));
    for (int d : {4, 5}) {
        bool positive = true;
        for (int k = 0; k <= 300; ++k) positive = positive && kernel_recursion(d, 1.0, 0.1 * k) > 0;
        CHECK(positive);
    }
    CHECK_THROWS_AS(kernel_recursion(3, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("six-dimensional kernel keeps unit mass") {
    KernelTable table(6, 0.5);
    CHECK(table.mass() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("kernel tables: positivity, unit mass, interpolation") {
    for (int d : {2, 3, 4, 5}) {
        for (double t : {0.01, 0.1, 1.0, 3.0}) {
            CAPTURE(d);
            CAPTURE(t);
            auto table = kernel_table(d, t);
            CHECK(table->mass() == doctest::Approx(1.0).epsilon(1e-8));
            double worst = 0;
            for (int k = 0; k < 40; ++k) {
                const double r = (k + 0.37) * table->cutoff() / 40;
                const double direct = heat_kernel(d, t, r);
                const double v = (*table)(r);
                CHECK(v >= 0.0);
                if (direct > 1e-250) worst = std::max(worst, std::abs(v / direct - 1));
            }
            CHECK(worst < 1e-8);
            CHECK((*table)(table->cutoff() + 1) == 0.0);
        }
    }
    CHECK(kernel_table(3, 1.0) == kernel_table(3, 1.0));
    CHECK_THROWS_AS(KernelTable(3, 0.0), InvalidArgument);
}
