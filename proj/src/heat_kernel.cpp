#include "hypmild/heat_kernel.hpp"

#include "hypmild/error.hpp"
#include "hypmild/geometry.hpp"
#include "hypmild/quadrature.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace hypmild {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr int kOrder = 20;
constexpr double kSmallR = 1e-3;

void check_time(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw InvalidArgument("heat kernel: time must be positive, got t = " + std::to_string(t));
    }
}

void check_radius(double r) {
    if (!(r >= 0.0)) {
        throw InvalidArgument("heat kernel: distance must be nonnegative");
    }
}

template <class T>
T x_over_sinh(T x) {
    if (std::abs(x) < 1e-4) {
        return T(1.0) - x * x / 6.0;
    }
    return x / std::sinh(x);
}

// q = p * exp(r^2 / 4t); the Gaussian factor is kept out so that tables never underflow.
template <class T>
T scaled_h3(double t, T r) {
    const double c = std::pow(4.0 * kPi * t, -1.5) * std::exp(-t);
    return c * x_over_sinh(r);
}

// s = r + v^2 turns int_r^inf s e^{-s^2/4t} / sqrt(cosh s - cosh r) ds into a smooth
// integral in v, using cosh s - cosh r = 2 sinh(r + v^2/2) sinh(v^2/2).
template <class T>
T scaled_h2(double t, T r) {
    const double rr = std::real(r);
    const double s_max = std::sqrt(rr * rr + 160.0 * t);
    const double v_max = std::sqrt(s_max - rr);

    std::vector<double> breaks{0.0};
    // near v ~ sqrt(2r) the integrand has complex singularities; grade the panels towards 0
    if (rr > 0.0) {
        double b = std::sqrt(rr);
        while (b < 0.5 * v_max) {
            breaks.push_back(b);
            b *= 2.0;
        }
    }
    const double start = breaks.back();
    constexpr int uniform_panels = 24;
    for (int k = 1; k <= uniform_panels; ++k) {
        breaks.push_back(start + (v_max - start) * k / uniform_panels);
    }

    const auto& rule = gauss_legendre(kOrder);
    T acc(0.0);
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double a = breaks[p];
        const double h = 0.5 * (breaks[p + 1] - a);
        for (int k = 0; k < kOrder; ++k) {
            const double v = a + h * (rule.nodes[k] + 1.0);
            const double v2 = v * v;
            const double root = std::sqrt(2.0 * x_over_sinh(0.5 * v2));  // v / sqrt(sinh(v^2/2))
            const T s = r + v2;
            const T gauss = std::exp(-(2.0 * r * v2 + v2 * v2) / (4.0 * t));
            acc += h * rule.weights[k] * s * gauss * 2.0 * root / std::sqrt(2.0 * std::sinh(r + 0.5 * v2));
        }
    }
    return std::sqrt(2.0) * std::exp(-0.25 * t) * std::pow(4.0 * kPi * t, -1.5) * acc;
}

double scaled_base(int d, double t, double r) {
    return d == 2 ? std::real(scaled_h2(t, cplx(r))) : scaled_h3(t, r);
}

// (dq/dr - r q / 2t) / sinh r for the base kernel of the given parity
double descent_ratio_base(int base, double t, double r) {
    constexpr double h = 1e-30;
    const cplx z(r, h);
    const cplx q = base == 2 ? scaled_h2(t, z) : scaled_h3(t, z);
    const double dq = std::imag(q) / h;
    return (dq - r * std::real(q) / (2.0 * t)) / std::sinh(r);
}

double scaled_recursion(int d, double t, double r);

double descent_ratio(int d_low, double t, double r) {
    if (d_low <= 3) {
        return descent_ratio_base(d_low, t, r);
    }
    // higher levels: fourth-order central differences of the lower level (kernel is even in r)
    const double h = 1e-3;
    auto q = [&](double x) { return scaled_recursion(d_low, t, std::abs(x)); };
    const double dq = (q(r - 2 * h) - 8 * q(r - h) + 8 * q(r + h) - q(r + 2 * h)) / (12 * h);
    return (dq - r * q(r) / (2.0 * t)) / std::sinh(r);
}

double scaled_recursion(int d, double t, double r) {
    if (d < 4) {
        return scaled_base(d, t, r);
    }
    const int d_low = d - 2;
    double ratio = 0.0;
    if (r < kSmallR) {
        // ratio is even in r: extrapolate a + b r^2
        const double r1 = kSmallR;
        const double r2 = 2.0 * kSmallR;
        const double f1 = descent_ratio(d_low, t, r1);
        const double f2 = descent_ratio(d_low, t, r2);
        const double b = (f2 - f1) / (r2 * r2 - r1 * r1);
        ratio = f1 + b * (r * r - r1 * r1);
    } else {
        ratio = descent_ratio(d_low, t, r);
    }
    return -std::exp(-d_low * t) / (2.0 * kPi) * ratio;
}

double scaled_kernel(int d, double t, double r) {
    return d <= 3 ? scaled_base(d, t, r) : scaled_recursion(d, t, r);
}

}  // namespace

namespace detail {
std::complex<double> kernel_h3(double t, std::complex<double> r) {
    return scaled_h3(t, r) * std::exp(-r * r / (4.0 * t));
}
std::complex<double> kernel_h2(double t, std::complex<double> r) {
    return scaled_h2(t, r) * std::exp(-r * r / (4.0 * t));
}
}  // namespace detail

double kernel_h3(double t, double r) {
    check_time(t);
    check_radius(r);
    return scaled_h3(t, r) * std::exp(-r * r / (4.0 * t));
}

double kernel_h2(double t, double r) {
    check_time(t);
    check_radius(r);
    return std::real(scaled_h2(t, cplx(r))) * std::exp(-r * r / (4.0 * t));
}

double kernel_recursion(int d, double t, double r) {
    if (d < 4) {
        throw InvalidArgument("kernel_recursion: needs d >= 4, got d = " + std::to_string(d));
    }
    check_time(t);
    check_radius(r);
    return scaled_recursion(d, t, r) * std::exp(-r * r / (4.0 * t));
}

double heat_kernel(int d, double t, double r) {
    if (d < 2) {
        throw InvalidArgument("heat_kernel: invalid dimension d = " + std::to_string(d));
    }
    if (d == 2) return kernel_h2(t, r);
    if (d == 3) return kernel_h3(t, r);
    return kernel_recursion(d, t, r);
}

double kernel_cutoff(int d, double t) { return (d - 1) * t + 14.0 * std::sqrt(t) + 5.0; }

KernelTable::KernelTable(int d, double t) : d_(d), t_(t), cutoff_(kernel_cutoff(d, t)) {
    if (d < 2) {
        throw InvalidArgument("KernelTable: invalid dimension d = " + std::to_string(d));
    }
    check_time(t);
    if (d != 3) {
        step_ = 0.01 * std::min(std::sqrt(t), 1.0);
        const auto n = static_cast<std::size_t>(std::ceil(cutoff_ / step_)) + 3;
        exponent_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double q = scaled_kernel(d, t, k * step_);
            if (!(q > 0.0) || !std::isfinite(q)) {
                throw ConvergenceFailure("KernelTable: non-positive kernel sample at r = " +
                                         std::to_string(k * step_));
            }
            exponent_[k] = std::log(q);
        }
    }
    const double omega = sphere_area(d - 1);
    const double panel = std::min(1.0, 0.5 * std::sqrt(t));
    const int panels = static_cast<int>(std::ceil(cutoff_ / panel));
    mass_ = integrate_composite(
        [&](double r) { return (*this)(r) * omega * std::pow(std::sinh(r), d - 1); }, 0.0, cutoff_,
        panels, 16);
}

double KernelTable::operator()(double r) const {
    if (r > cutoff_) {
        return 0.0;
    }
    const double gauss = std::exp(-r * r / (4.0 * t_));
    if (d_ == 3) {
        return scaled_h3(t_, r) * gauss;
    }
    const double x = r / step_;
    auto k = static_cast<std::ptrdiff_t>(x);
    k = std::min<std::ptrdiff_t>(k, static_cast<std::ptrdiff_t>(exponent_.size()) - 3);
    const double u = x - static_cast<double>(k);
    // nodes k-1, k, k+1, k+2 at offsets -1, 0, 1, 2; the table is even about r = 0
    auto e = [&](std::ptrdiff_t j) { return exponent_[static_cast<std::size_t>(j < 0 ? -j : j)]; };
    const double l0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
    const double l1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
    const double l2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
    const double l3 = (u + 1.0) * u * (u - 1.0) / 6.0;
    const double ex = l0 * e(k - 1) + l1 * e(k) + l2 * e(k + 1) + l3 * e(k + 2);
    return std::exp(ex) * gauss;
}

KernelTablePtr kernel_table(int d, double t) {
    static std::mutex mutex;
    static std::map<std::pair<int, std::uint64_t>, KernelTablePtr> cache;
    const auto key = std::make_pair(d, std::bit_cast<std::uint64_t>(t));
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) {
            return it->second;
        }
    }
    auto table = std::make_shared<const KernelTable>(d, t);
    std::lock_guard lock(mutex);
    return cache.emplace(key, table).first->second;
}

}  // namespace hypmild
