#include "hypmild/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace hypmild {

namespace {

QuadratureRule compute_rule(int n) {
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        // recompute derivative at converged node
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[n / 2] = 0.0;
    }
    return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
    if (n < 1) {
        throw std::invalid_argument("gauss_legendre: order must be positive");
    }
    static std::mutex mutex;
    static std::map<int, QuadratureRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, n == 1 ? QuadratureRule{{0.0}, {2.0}} : compute_rule(n)).first;
    }
    return it->second;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
    const auto& ref = gauss_legendre(n);
    QuadratureRule out;
    out.nodes.resize(n);
    out.weights.resize(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (int i = 0; i < n; ++i) {
        out.nodes[i] = mid + half * ref.nodes[i];
        out.weights[i] = half * ref.weights[i];
    }
    return out;
}

double integrate_composite(const std::function<double(double)>& fn, double a, double b,
                           int panels, int order) {
    const auto& ref = gauss_legendre(order);
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        double acc = 0.0;
        for (int i = 0; i < order; ++i) {
            acc += ref.weights[i] * fn(lo + 0.5 * h * (ref.nodes[i] + 1.0));
        }
        total += 0.5 * h * acc;
    }
    return total;
}

}  // namespace hypmild
