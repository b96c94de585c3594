#include "hypmild/geometry.hpp"

#include "hypmild/error.hpp"
#include "hypmild/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace hypmild {

namespace {

std::vector<double> barycentric_weights(const std::vector<double>& x) {
    std::vector<double> lambda(x.size(), 1.0);
    for (std::size_t k = 0; k < x.size(); ++k) {
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (j != k) {
                lambda[k] /= (x[k] - x[j]);
            }
        }
    }
    return lambda;
}

Eigen::MatrixXd differentiation_matrix(const std::vector<double>& x) {
    const auto lambda = barycentric_weights(x);
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double diag = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) {
                d(i, j) = (lambda[j] / lambda[i]) / (x[i] - x[j]);
                diag -= d(i, j);
            }
        }
        d(i, i) = diag;
    }
    return d;
}

// second derivative from the first-derivative matrix without forming D*D
Eigen::MatrixXd second_differentiation_matrix(const std::vector<double>& x, const Eigen::MatrixXd& d1) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double diag = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) {
                d2(i, j) = 2.0 * d1(i, j) * (d1(i, i) - 1.0 / (x[i] - x[j]));
                diag -= d2(i, j);
            }
        }
        d2(i, i) = diag;
    }
    return d2;
}

void check_dimension(int d) {
    if (d < 2) {
        throw InvalidArgument("invalid dimension d = " + std::to_string(d) + " (need d >= 2)");
    }
}

}  // namespace

double sphere_area(int k) {
    const double n = k + 1.0;
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double volume_weight(double r, int d) {
    check_dimension(d);
    if (r < 0.0) {
        throw InvalidArgument("volume_weight: negative radius");
    }
    return sphere_area(d - 1) * std::pow(std::sinh(r), d - 1);
}

double hyperbolic_ball_volume(double R, int d) {
    check_dimension(d);
    if (d == 2) {
        return 2.0 * std::numbers::pi * (std::cosh(R) - 1.0);
    }
    if (d == 3) {
        return std::numbers::pi * (std::sinh(2.0 * R) - 2.0 * R);
    }
    return integrate_composite([d](double r) { return volume_weight(r, d); }, 0.0, R,
                               std::max(4, static_cast<int>(std::ceil(4 * R))), 20);
}

double geodesic_distance(double r1, double r2, double phi) {
    if (r1 < 0.0 || r2 < 0.0) {
        throw InvalidArgument("geodesic_distance: negative radius");
    }
    // cosh(dist) - 1 = (cosh(r1 - r2) - 1) + 2 sinh r1 sinh r2 sin^2(phi / 2)
    const double half_gap = std::sinh(0.5 * (r1 - r2));
    const double s = std::sin(0.5 * phi);
    double x = 2.0 * half_gap * half_gap + 2.0 * std::sinh(r1) * std::sinh(r2) * s * s;
    if (!(x > 0.0)) {
        x = 0.0;  // arccosh argument clamped at 1
    }
    return std::log1p(x + std::sqrt(x * (x + 2.0)));
}

double default_r_max(double t_max) { return 20.0 + 6.0 * std::sqrt(std::max(t_max, 0.0)); }

std::shared_ptr<const RadialGrid> RadialGrid::make(const GridSpec& spec) {
    return std::shared_ptr<const RadialGrid>(new RadialGrid(spec));
}

RadialGrid::RadialGrid(const GridSpec& spec) : spec_(spec) {
    check_dimension(spec.d);
    if (!(spec.r_max > 0.0) || spec.panels < 1 || spec.nodes_per_panel < 2) {
        throw InvalidArgument("RadialGrid: need r_max > 0, panels >= 1, nodes_per_panel >= 2");
    }
    sphere_area_ = hypmild::sphere_area(spec.d - 1);
    const int m = spec.nodes_per_panel;
    const auto& ref = gauss_legendre(m);
    const double h = panel_length();
    nodes_.reserve(static_cast<std::size_t>(spec.panels * m));
    for (int p = 0; p < spec.panels; ++p) {
        for (int k = 0; k < m; ++k) {
            const double r = p * h + 0.5 * h * (ref.nodes[k] + 1.0);
            const double w = 0.5 * h * ref.weights[k];
            nodes_.push_back(r);
            weights_.push_back(w);
            volume_weights_.push_back(w * sphere_area_ * std::pow(std::sinh(r), spec.d - 1));
        }
    }
    barycentric_ = barycentric_weights(ref.nodes);

    const auto n = static_cast<Eigen::Index>(nodes_.size());
    d1_ = Eigen::MatrixXd::Zero(n, n);
    d1_even_ = Eigen::MatrixXd::Zero(n, n);
    d2_even_ = Eigen::MatrixXd::Zero(n, n);
    const Eigen::MatrixXd dref = differentiation_matrix(ref.nodes) * (2.0 / h);
    std::vector<double> ref_scaled(ref.nodes.size());
    for (std::size_t k = 0; k < ref_scaled.size(); ++k) {
        ref_scaled[k] = 0.5 * h * ref.nodes[k];
    }
    const Eigen::MatrixXd dref2 = second_differentiation_matrix(ref_scaled, dref);
    for (int p = 0; p < spec.panels; ++p) {
        d1_.block(p * m, p * m, m, m) = dref;
        d1_even_.block(p * m, p * m, m, m) = dref;
        d2_even_.block(p * m, p * m, m, m) = dref2;
    }
    // First panel: interpolate on the mirrored node set {-r_k} U {r_k} and fold back.
    std::vector<double> mirrored;
    for (int k = m - 1; k >= 0; --k) {
        mirrored.push_back(-nodes_[static_cast<std::size_t>(k)]);
    }
    for (int k = 0; k < m; ++k) {
        mirrored.push_back(nodes_[static_cast<std::size_t>(k)]);
    }
    const Eigen::MatrixXd dm = differentiation_matrix(mirrored);
    const Eigen::MatrixXd dm2 = second_differentiation_matrix(mirrored, dm);
    // Only the inner half of the panel uses the folded rows; the outer rows of the
    // mirrored set are badly conditioned and keep the plain panel stencil.
    for (int i = 0; i < m / 2; ++i) {
        for (int k = 0; k < m; ++k) {
            const int pos = m + k;
            const int neg = m - 1 - k;
            d1_even_(i, k) = dm(m + i, pos) + dm(m + i, neg);
            d2_even_(i, k) = dm2(m + i, pos) + dm2(m + i, neg);
        }
    }
}

void RadialGrid::panel_basis(int panel, double x, std::span<double> values,
                             std::span<double> derivs) const {
    const int m = spec_.nodes_per_panel;
    const double h = panel_length();
    const double a = panel * h;
    const double xi = 2.0 * (x - a) / h - 1.0;
    const auto& ref = gauss_legendre(m);
    for (int k = 0; k < m; ++k) {
        if (std::abs(xi - ref.nodes[k]) < 1e-14) {
            for (int j = 0; j < m; ++j) {
                values[j] = (j == k) ? 1.0 : 0.0;
                derivs[j] = d1_(panel * m + k, panel * m + j);
            }
            return;
        }
    }
    double big_l = 1.0;
    double inv_sum = 0.0;
    for (int j = 0; j < m; ++j) {
        big_l *= (xi - ref.nodes[j]);
        inv_sum += 1.0 / (xi - ref.nodes[j]);
    }
    for (int k = 0; k < m; ++k) {
        const double diff = xi - ref.nodes[k];
        values[k] = big_l * barycentric_[k] / diff;
        derivs[k] = values[k] * (inv_sum - 1.0 / diff) * (2.0 / h);
    }
}

RadialField::RadialField(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) {
        throw InvalidArgument("RadialField: null grid");
    }
    if (static_cast<std::size_t>(values_.size()) != grid_->size()) {
        throw GridMismatch("RadialField: value count does not match grid size");
    }
    if (!values_.allFinite()) {
        throw InvalidArgument("RadialField: non-finite sample");
    }
}

RadialField::RadialField(GridPtr grid, Eigen::VectorXd values, Unchecked)
    : grid_(std::move(grid)), values_(std::move(values)) {}

RadialField RadialField::zeros(GridPtr grid) {
    const auto n = static_cast<Eigen::Index>(grid->size());
    return RadialField(std::move(grid), Eigen::VectorXd::Zero(n), Unchecked{});
}

RadialField RadialField::from_function(GridPtr grid, const std::function<double(double)>& fn) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(grid->size()));
    const auto nodes = grid->nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = fn(nodes[i]);
    }
    return RadialField(std::move(grid), std::move(v));
}

void require_same_grid(const RadialField& a, const RadialField& b) {
    if (!a.same_grid(b)) {
        throw GridMismatch("fields live on different grids");
    }
}

RadialField& RadialField::operator+=(const RadialField& other) {
    require_same_grid(*this, other);
    values_ += other.values_;
    return *this;
}

RadialField& RadialField::operator-=(const RadialField& other) {
    require_same_grid(*this, other);
    values_ -= other.values_;
    return *this;
}

RadialField& RadialField::operator*=(double s) {
    values_ *= s;
    return *this;
}

RadialField operator*(const RadialField& a, const RadialField& b) {
    require_same_grid(a, b);
    return RadialField(a.grid_, a.values_.cwiseProduct(b.values_), RadialField::Unchecked{});
}

RadialField RadialField::abs() const {
    return RadialField(grid_, values_.cwiseAbs(), Unchecked{});
}

double lp_norm(const RadialField& field, double p) {
    if (!(p >= 1.0)) {
        throw InvalidArgument("lp_norm: exponent must satisfy p >= 1");
    }
    const auto& v = field.values();
    if (std::isinf(p)) {
        return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
    }
    const auto w = field.grid()->volume_weights();
    // scale by the max to keep |f|^p representable
    const double scale = v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        return 0.0;
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        acc += w[static_cast<std::size_t>(i)] * std::pow(std::abs(v[i]) / scale, p);
    }
    return scale * std::pow(acc, 1.0 / p);
}

double inner_product(const RadialField& a, const RadialField& b) {
    require_same_grid(a, b);
    const auto w = a.grid()->volume_weights();
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i] * a[i] * b[i];
    }
    return acc;
}

namespace {

void require_resolution(const RadialGrid& grid) {
    if (grid.size() < 5) {
        throw InvalidArgument("radial operator: grid too coarse (need at least 5 nodes)");
    }
}

}  // namespace

RadialField radial_laplacian(const RadialField& field) {
    const auto& grid = *field.grid();
    require_resolution(grid);
    const Eigen::VectorXd d1 = grid.even_first_derivative() * field.values();
    const Eigen::VectorXd d2 = grid.even_second_derivative() * field.values();
    Eigen::VectorXd out(d1.size());
    const auto nodes = grid.nodes();
    const int dm1 = grid.dimension() - 1;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        const double r = nodes[static_cast<std::size_t>(i)];
        out[i] = d2[i] + dm1 * d1[i] / std::tanh(r);
    }
    return RadialField(field.grid(), std::move(out));
}

RadialField radial_divergence(const RadialField& field) {
    const auto& grid = *field.grid();
    require_resolution(grid);
    const Eigen::VectorXd d1 = grid.first_derivative() * field.values();
    Eigen::VectorXd out(d1.size());
    const auto nodes = grid.nodes();
    const int dm1 = grid.dimension() - 1;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out[i] = d1[i] + dm1 * field.values()[i] / std::tanh(nodes[static_cast<std::size_t>(i)]);
    }
    return RadialField(field.grid(), std::move(out));
}

}  // namespace hypmild
