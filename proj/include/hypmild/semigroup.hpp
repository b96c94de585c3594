#pragma once

#include "hypmild/geometry.hpp"
#include "hypmild/state.hpp"

#include <Eigen/Dense>

#include <memory>

namespace hypmild {

/// Spherical mean of the heat kernel between radii r and x, times area(S^{d-1}):
/// K(r, x) = int_{S^{d-1}} p_t(dist(r, x, sigma)) dsigma, by quadrature in the distance variable.
double pair_kernel(int d, double t, double r, double x);

/// Same quantity for d = 3 in closed form.
double pair_kernel_h3(double t, double r, double x);

/// Distance beyond which the pair kernel is negligible (relative e^{-36}).
double semigroup_reach(int d, double t);

/// Matrices of e^{t Delta} and of e^{t Delta} composed with the radial divergence,
/// acting on nodal values of a grid. Entries integrate the kernel against the
/// panelwise interpolant of the input, so polynomial data are mapped exactly.
class SemigroupMatrices {
public:
    SemigroupMatrices(GridPtr grid, double t);

    const GridPtr& grid() const { return grid_; }
    double time() const { return t_; }
    const Eigen::MatrixXd& smoothing() const { return s_; }
    const Eigen::MatrixXd& divergence() const { return div_; }

private:
    GridPtr grid_;
    double t_;
    Eigen::MatrixXd s_;
    Eigen::MatrixXd div_;
};

using SemigroupPtr = std::shared_ptr<const SemigroupMatrices>;

/// Memoised by (grid, t). Requires t > 0.
SemigroupPtr semigroup_matrices(const GridPtr& grid, double t);
void clear_semigroup_cache();

/// e^{t Delta} f.
RadialField apply_scalar_semigroup(double t, const RadialField& f);
/// e^{tL} f = e^{-(d-1)t} e^{t Delta} f on the radial surrogate.
RadialField apply_vector_semigroup(double t, const RadialField& f);
/// e^{t Delta} div v and e^{tL} div v.
RadialField apply_scalar_semigroup_div(double t, const RadialField& v);
RadialField apply_vector_semigroup_div(double t, const RadialField& v);
/// e^{-tA}: vector semigroup on u, scalar semigroup on theta.
StateVector apply_matrix_semigroup(double t, const StateVector& s);
/// e^{-tA} div applied slotwise.
StateVector apply_matrix_semigroup_div(double t, const StateVector& s);

}  // namespace hypmild
