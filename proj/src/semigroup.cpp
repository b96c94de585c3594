#include "hypmild/semigroup.hpp"

#include "hypmild/error.hpp"
#include "hypmild/heat_kernel.hpp"
#include "hypmild/quadrature.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace hypmild {

namespace {

constexpr int kDistanceOrder = 10;
constexpr int kFineOrder = 12;

double ipow(double x, int n) {
    double v = 1.0;
    for (int k = 0; k < std::abs(n); ++k) v *= x;
    return n < 0 ? 1.0 / v : v;
}

double sinhc(double y) { return std::abs(y) < 1e-4 ? 1.0 + y * y / 6.0 : std::sinh(y) / y; }

void check_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw InvalidArgument("semigroup: time must be nonnegative, got t = " + std::to_string(t));
    }
}

// Integrates p(s) sinh(s) (b sin phi)^{d-3} over s in [s0, s_hi], where
// b sin phi = sqrt(g0 g1) Q(s), g0 = s - s0, g1 = s1 - s, and Q is smooth and positive.
class DistanceIntegral {
public:
    DistanceIntegral(const KernelTable& p, int d, double s0, double s1)
        : p_(p), d_(d), s0_(s0), s1_(s1) {}

    double q_factor(double s, double g0, double g1) const {
        return std::sqrt(std::sinh(0.5 * (s + s0_)) * std::sinh(0.5 * (s1_ + s)) * sinhc(0.5 * g0) *
                         sinhc(0.5 * g1));
    }

    double smooth(double s_lo, double s_hi, double ell) const {
        const int panels = std::max(1, static_cast<int>(std::ceil((s_hi - s_lo) / ell)));
        const auto& rule = gauss_legendre(kDistanceOrder);
        const double h = (s_hi - s_lo) / panels;
        double acc = 0.0;
        for (int k = 0; k < panels; ++k) {
            for (int j = 0; j < kDistanceOrder; ++j) {
                const double s = s_lo + h * (k + 0.5 * (rule.nodes[j] + 1.0));
                const double g0 = s - s0_;
                const double g1 = s1_ - s;
                const double bsin = std::sqrt(g0 * g1) * q_factor(s, g0, g1);
                acc += 0.5 * h * rule.weights[j] * p_(s) * std::sinh(s) * ipow(bsin, d_ - 3);
            }
        }
        return acc;
    }

    // s = s0 + u^2 (from_left) or s = s1 - u^2, u in [0, sqrt(len)]; removes the square-root endpoint
    double substituted(double len, bool from_left, double ell) const {
        const int panels = std::max(1, static_cast<int>(std::ceil(len / ell)));
        const auto& rule = gauss_legendre(kDistanceOrder);
        const double u_max = std::sqrt(len);
        const double h = u_max / panels;
        double acc = 0.0;
        for (int k = 0; k < panels; ++k) {
            for (int j = 0; j < kDistanceOrder; ++j) {
                const double u = h * (k + 0.5 * (rule.nodes[j] + 1.0));
                const double u2 = u * u;
                const double s = from_left ? s0_ + u2 : s1_ - u2;
                const double g0 = from_left ? u2 : s - s0_;
                const double g1 = from_left ? s1_ - s : u2;
                const double other = from_left ? g1 : g0;
                const double q = q_factor(s, g0, g1);
                const double body = 2.0 * ipow(q * std::sqrt(other), d_ - 3) * ipow(u, d_ - 2);
                acc += 0.5 * h * rule.weights[j] * p_(s) * std::sinh(s) * body;
            }
        }
        return acc;
    }

private:
    const KernelTable& p_;
    int d_;
    double s0_;
    double s1_;
};

double pair_kernel_from_table(const KernelTable& p, double reach, double r, double x) {
    const int d = p.dimension();
    const double t = p.time();
    const double s0 = std::abs(r - x);
    const double s1 = r + x;
    if (s0 >= reach) {
        return 0.0;
    }
    const double s_hi = std::min(s1, reach);
    const double ell = std::min(1.5, std::sqrt(t));
    const DistanceIntegral integral(p, d, s0, s1);
    double value = 0.0;
    if (d % 2 == 1) {
        value = integral.smooth(s0, s_hi, ell);
    } else {
        const double mid = 0.5 * (s0 + s_hi);
        value = integral.substituted(mid - s0, true, ell);
        if (s_hi == s1) {
            value += integral.substituted(s1 - mid, false, ell);
        } else {
            value += integral.smooth(mid, s_hi, ell);
        }
    }
    const double b = std::sinh(r) * std::sinh(x);
    return sphere_area(d - 2) * value / ipow(b, d - 2);
}

}  // namespace

double semigroup_reach(int d, double t) {
    return std::min((d - 1) * t + 12.0 * std::sqrt(t), kernel_cutoff(d, t));
}

double pair_kernel(int d, double t, double r, double x) {
    if (!(t > 0.0)) {
        throw InvalidArgument("pair_kernel: time must be positive");
    }
    const auto table = kernel_table(d, t);
    return pair_kernel_from_table(*table, semigroup_reach(d, t), r, x);
}

double pair_kernel_h3(double t, double r, double x) {
    if (!(t > 0.0)) {
        throw InvalidArgument("pair_kernel_h3: time must be positive");
    }
    const double c = std::pow(4.0 * std::numbers::pi * t, -1.5);
    const double gap = r - x;
    return 4.0 * std::numbers::pi * t * c * std::exp(-t - gap * gap / (4.0 * t)) * (-std::expm1(-r * x / t)) /
           (std::sinh(r) * std::sinh(x));
}

SemigroupMatrices::SemigroupMatrices(GridPtr grid, double t) : grid_(std::move(grid)), t_(t) {
    if (!(t > 0.0)) {
        throw InvalidArgument("SemigroupMatrices: time must be positive");
    }
    const auto& g = *grid_;
    const int d = g.dimension();
    const int m = g.nodes_per_panel();
    const auto n = static_cast<Eigen::Index>(g.size());
    const double reach = semigroup_reach(d, t);
    const double hp = g.panel_length();
    const int sub = std::max(1, static_cast<int>(std::ceil(hp / std::sqrt(t))));
    const auto& rule = gauss_legendre(kFineOrder);
    const auto table = d == 3 ? nullptr : kernel_table(d, t);

    // fine nodes of one panel, relative to its left end, with basis values and derivatives
    struct Fine {
        double offset, weight;
        std::vector<double> val, der;
    };
    std::vector<Fine> fine;
    for (int k = 0; k < sub; ++k) {
        for (int j = 0; j < kFineOrder; ++j) {
            Fine f{hp * (k + 0.5 * (rule.nodes[j] + 1.0)) / sub, 0.5 * hp / sub * rule.weights[j],
                   std::vector<double>(m), std::vector<double>(m)};
            g.panel_basis(0, f.offset, f.val, f.der);
            fine.push_back(std::move(f));
        }
    }

    s_ = Eigen::MatrixXd::Zero(n, n);
    div_ = Eigen::MatrixXd::Zero(n, n);
    const auto nodes = g.nodes();
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = nodes[static_cast<std::size_t>(i)];
        const int first = std::max(0, static_cast<int>(std::floor((r - reach) / hp)));
        const int last = std::min(g.panels() - 1, static_cast<int>(std::floor((r + reach) / hp)));
        for (int panel = first; panel <= last; ++panel) {
            for (const auto& f : fine) {
                const double x = panel * hp + f.offset;
                const double k = d == 3 ? (std::abs(r - x) < reach ? pair_kernel_h3(t, r, x) : 0.0)
                                        : pair_kernel_from_table(*table, reach, r, x);
                if (k == 0.0) {
                    continue;
                }
                const double sh = std::sinh(x);
                const double vol = ipow(sh, d - 1);
                const double dvol = (d - 1) * std::cosh(x) * ipow(sh, d - 2);
                for (int j = 0; j < m; ++j) {
                    const Eigen::Index col = panel * m + j;
                    s_(i, col) += f.weight * k * vol * f.val[j];
                    div_(i, col) += f.weight * k * (f.der[j] * vol + f.val[j] * dvol);
                }
            }
        }
    }
}

namespace {

std::mutex cache_mutex;
std::map<std::pair<const RadialGrid*, std::uint64_t>, SemigroupPtr> cache;

}  // namespace

SemigroupPtr semigroup_matrices(const GridPtr& grid, double t) {
    const auto key = std::make_pair(grid.get(), std::bit_cast<std::uint64_t>(t));
    {
        std::lock_guard lock(cache_mutex);
        if (auto it = cache.find(key); it != cache.end()) {
            return it->second;
        }
    }
    auto ops = std::make_shared<const SemigroupMatrices>(grid, t);
    std::lock_guard lock(cache_mutex);
    // the cached object holds the grid alive, so the raw-pointer key cannot be reused
    return cache.emplace(key, ops).first->second;
}

void clear_semigroup_cache() {
    std::lock_guard lock(cache_mutex);
    cache.clear();
}

RadialField apply_scalar_semigroup(double t, const RadialField& f) {
    check_time(t);
    if (t == 0.0) {
        return f;
    }
    const auto ops = semigroup_matrices(f.grid(), t);
    return RadialField(f.grid(), ops->smoothing() * f.values());
}

RadialField apply_vector_semigroup(double t, const RadialField& f) {
    return apply_scalar_semigroup(t, f) * std::exp(-(f.grid()->dimension() - 1) * t);
}

RadialField apply_scalar_semigroup_div(double t, const RadialField& v) {
    check_time(t);
    if (t == 0.0) {
        return radial_divergence(v);
    }
    const auto ops = semigroup_matrices(v.grid(), t);
    return RadialField(v.grid(), ops->divergence() * v.values());
}

RadialField apply_vector_semigroup_div(double t, const RadialField& v) {
    return apply_scalar_semigroup_div(t, v) * std::exp(-(v.grid()->dimension() - 1) * t);
}

StateVector apply_matrix_semigroup(double t, const StateVector& s) {
    return StateVector(apply_vector_semigroup(t, s.u), apply_scalar_semigroup(t, s.theta));
}

StateVector apply_matrix_semigroup_div(double t, const StateVector& s) {
    return StateVector(apply_vector_semigroup_div(t, s.u), apply_scalar_semigroup_div(t, s.theta));
}

}  // namespace hypmild
