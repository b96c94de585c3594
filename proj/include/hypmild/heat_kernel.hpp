#pragma once

#include <complex>
#include <memory>
#include <vector>

namespace hypmild {

/// Heat kernel of H^3 as a function of geodesic distance.
double kernel_h3(double t, double r);

/// Heat kernel of H^2, evaluated from its integral representation.
double kernel_h2(double t, double r);

/// Heat kernel of H^d for d >= 4 through the descent relation
/// p^{d+2}(r) = -e^{-dt} / (2 pi sinh r) d/dr p^d(r).
double kernel_recursion(int d, double t, double r);

/// Kernel of H^d for any d >= 2, dispatching to the closed forms above.
double heat_kernel(int d, double t, double r);

namespace detail {
// Complex arguments are used for complex-step differentiation in the descent relation.
std::complex<double> kernel_h3(double t, std::complex<double> r);
std::complex<double> kernel_h2(double t, std::complex<double> r);
}  // namespace detail

/// Distance beyond which the kernel carries less than ~e^{-40} of its mass.
double kernel_cutoff(int d, double t);

/// Heat kernel p_t of H^d tabulated on [0, cutoff].
/// d = 3 is evaluated in closed form; other dimensions interpolate log p + r^2/(4t)
/// with 4-point Lagrange stencils, which keeps the interpolant positive.
class KernelTable {
public:
    KernelTable(int d, double t);

    int dimension() const { return d_; }
    double time() const { return t_; }
    double cutoff() const { return cutoff_; }
    double step() const { return step_; }
    std::size_t size() const { return exponent_.size(); }

    /// p_t(r); zero beyond the cutoff.
    double operator()(double r) const;

    /// Total mass int_0^cutoff p_t(r) area(S^{d-1}) sinh^{d-1}(r) dr.
    double mass() const { return mass_; }

private:
    int d_;
    double t_;
    double cutoff_;
    double step_ = 0.0;
    std::vector<double> exponent_;  // log p(r_k) + r_k^2 / (4t) at r_k = k * step_
    double mass_ = 0.0;
};

using KernelTablePtr = std::shared_ptr<const KernelTable>;

/// Shared, memoised tables keyed by (d, t).
KernelTablePtr kernel_table(int d, double t);

}  // namespace hypmild
