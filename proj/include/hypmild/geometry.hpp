#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace hypmild {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Area of the unit k-sphere S^k embedded in R^{k+1}.
double sphere_area(int k);

/// Riemannian volume density of H^d in geodesic polar coordinates: area(S^{d-1}) sinh^{d-1}(r).
double volume_weight(double r, int d);

/// Closed-form volume of the geodesic ball of radius R in H^d (d = 2, 3 exactly; other d by quadrature).
double hyperbolic_ball_volume(double R, int d);

/// Geodesic distance between points at radii r1, r2 separated by angle phi (hyperbolic law of cosines).
double geodesic_distance(double r1, double r2, double phi);

struct GridSpec {
    int d = 3;
    double r_max = 20.0;
    int panels = 64;
    int nodes_per_panel = 8;
};

/// Default truncation radius for experiments reaching time t_max.
double default_r_max(double t_max);

/// Composite Gauss-Legendre discretisation of [0, r_max] carrying the hyperbolic volume weights.
class RadialGrid {
public:
    static std::shared_ptr<const RadialGrid> make(const GridSpec& spec);

    int dimension() const { return spec_.d; }
    double r_max() const { return spec_.r_max; }
    int panels() const { return spec_.panels; }
    int nodes_per_panel() const { return spec_.nodes_per_panel; }
    double panel_length() const { return spec_.r_max / spec_.panels; }
    const GridSpec& spec() const { return spec_; }
    std::size_t size() const { return nodes_.size(); }
    double sphere_area() const { return sphere_area_; }

    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> weights() const { return weights_; }
    /// Quadrature weight times volume density at each node.
    std::span<const double> volume_weights() const { return volume_weights_; }

    /// Lagrange basis of `panel` evaluated at x: values and first derivatives (size nodes_per_panel).
    void panel_basis(int panel, double x, std::span<double> values, std::span<double> derivs) const;

    /// First-derivative matrix of the panelwise interpolant (no extension at r = 0).
    const Eigen::MatrixXd& first_derivative() const { return d1_; }
    /// First and second derivative matrices with the first panel evenly extended across r = 0.
    const Eigen::MatrixXd& even_first_derivative() const { return d1_even_; }
    const Eigen::MatrixXd& even_second_derivative() const { return d2_even_; }

private:
    explicit RadialGrid(const GridSpec& spec);

    GridSpec spec_;
    double sphere_area_ = 0.0;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> volume_weights_;
    std::vector<double> barycentric_;  // reference-panel barycentric weights
    Eigen::MatrixXd d1_;
    Eigen::MatrixXd d1_even_;
    Eigen::MatrixXd d2_even_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// A radial scalar function sampled at the nodes of one grid.
class RadialField {
public:
    RadialField(GridPtr grid, Eigen::VectorXd values);
    static RadialField zeros(GridPtr grid);
    static RadialField from_function(GridPtr grid, const std::function<double(double)>& fn);

    const GridPtr& grid() const { return grid_; }
    const Eigen::VectorXd& values() const { return values_; }
    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
    double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

    bool same_grid(const RadialField& other) const { return grid_ == other.grid_; }

    RadialField& operator+=(const RadialField& other);
    RadialField& operator-=(const RadialField& other);
    RadialField& operator*=(double s);

    friend RadialField operator+(RadialField a, const RadialField& b) { return a += b; }
    friend RadialField operator-(RadialField a, const RadialField& b) { return a -= b; }
    friend RadialField operator*(RadialField a, double s) { return a *= s; }
    friend RadialField operator*(double s, RadialField a) { return a *= s; }
    /// Pointwise product.
    friend RadialField operator*(const RadialField& a, const RadialField& b);

    RadialField abs() const;

private:
    struct Unchecked {};
    RadialField(GridPtr grid, Eigen::VectorXd values, Unchecked);

    GridPtr grid_;
    Eigen::VectorXd values_;
};

/// Throws GridMismatch unless both fields live on the identical grid.
void require_same_grid(const RadialField& a, const RadialField& b);

/// L^p(H^d) norm of a radial field by grid quadrature; p = kInf gives the nodal maximum.
double lp_norm(const RadialField& field, double p);

/// L^2(H^d) inner product.
double inner_product(const RadialField& a, const RadialField& b);

/// Discrete Laplace-Beltrami operator on radial functions, f'' + (d-1) coth(r) f'.
RadialField radial_laplacian(const RadialField& field);

/// Divergence of the radial vector field v(r) d/dr, v' + (d-1) coth(r) v.
RadialField radial_divergence(const RadialField& field);

}  // namespace hypmild
