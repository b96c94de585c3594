#pragma once

#include <functional>
#include <vector>

namespace hypmild {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule with n points on [-1, 1] (Newton iteration on P_n).
const QuadratureRule& gauss_legendre(int n);

/// The n-point Gauss-Legendre rule mapped onto [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Composite Gauss-Legendre integral of fn over [a, b] with `panels` equal panels.
double integrate_composite(const std::function<double(double)>& fn, double a, double b,
                           int panels, int order = 16);

}  // namespace hypmild
