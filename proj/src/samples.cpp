#include "hypmild/samples.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace hypmild {

namespace {

std::string label(const char* prefix, double v) {
    std::ostringstream os;
    os << prefix << v;
    return os.str();
}

}  // namespace

double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x);
    const double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

std::vector<Sample> sample_library(const GridPtr& grid, std::optional<std::uint64_t> seed) {
    std::mt19937_64 rng(seed.value_or(0));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto jitter = [&](double v) { return seed ? v * (1.0 + 0.1 * unit(rng)) : v; };

    std::vector<Sample> out;
    for (double sigma : {0.5, 1.0, 2.0}) {
        const double s = jitter(sigma);
        out.push_back({label("gauss_s", sigma),
                       RadialField::from_function(grid, [s](double r) { return std::exp(-r * r / (s * s)); })});
    }
    for (double center : {1.0, 2.0, 3.0}) {
        const double c = jitter(center);
        out.push_back({label("shift_c", center),
                       RadialField::from_function(grid, [c](double r) { return std::exp(-2.0 * (r - c) * (r - c)); })});
    }
    for (double radius : {1.0, 2.0, 3.0}) {
        const double R = jitter(radius);
        out.push_back({label("plateau_R", radius), RadialField::from_function(grid, [R](double r) {
                           return smooth_step((R + 1.0 - r) / 1.0);
                       })});
    }
    for (double k : {2.0, 4.0, 6.0}) {
        const double kk = jitter(k);
        out.push_back({label("osc_k", k), RadialField::from_function(grid, [kk](double r) {
                           return std::cos(kk * r) * std::exp(-r * r / 2.25);
                       })});
    }
    return out;
}

}  // namespace hypmild
