#include "hypmild/state.hpp"

#include "hypmild/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hypmild {

StateVector::StateVector(RadialField u_, RadialField theta_) : u(std::move(u_)), theta(std::move(theta_)) {
    require_same_grid(u, theta);
}

StateVector StateVector::zeros(const GridPtr& grid) {
    return StateVector(RadialField::zeros(grid), RadialField::zeros(grid));
}

StateVector& StateVector::operator+=(const StateVector& other) {
    u += other.u;
    theta += other.theta;
    return *this;
}

StateVector& StateVector::operator-=(const StateVector& other) {
    u -= other.u;
    theta -= other.theta;
    return *this;
}

StateVector& StateVector::operator*=(double s) {
    u *= s;
    theta *= s;
    return *this;
}

double product_norm(const StateVector& s, double p) { return std::max(lp_norm(s.u, p), lp_norm(s.theta, p)); }

Trajectory::Trajectory(double dt, std::vector<StateVector> states) : dt_(dt), states_(std::move(states)) {
    if (states_.empty()) {
        throw InvalidArgument("Trajectory: no states");
    }
    if (!(dt > 0.0)) {
        throw InvalidArgument("Trajectory: time step must be positive");
    }
    for (const auto& s : states_) {
        if (s.grid() != states_.front().grid()) {
            throw GridMismatch("Trajectory: states on different grids");
        }
    }
}

std::size_t Trajectory::index_of(double t) const {
    const double x = t / dt_;
    const double k = std::round(x);
    if (std::abs(x - k) > 1e-9 * std::max(1.0, k) || k < 0 || k >= static_cast<double>(states_.size())) {
        throw GridMismatch("time " + std::to_string(t) + " is not a node of the trajectory grid");
    }
    return static_cast<std::size_t>(k);
}

double sup_norm(const Trajectory& traj, double p) {
    double m = 0.0;
    for (const auto& s : traj.states()) m = std::max(m, product_norm(s, p));
    return m;
}

double sup_norm_u(const Trajectory& traj, double p) {
    double m = 0.0;
    for (const auto& s : traj.states()) m = std::max(m, lp_norm(s.u, p));
    return m;
}

double sup_norm_theta(const Trajectory& traj, double p) {
    double m = 0.0;
    for (const auto& s : traj.states()) m = std::max(m, lp_norm(s.theta, p));
    return m;
}

double sup_distance(const Trajectory& a, const Trajectory& b, double p) {
    if (a.size() != b.size()) {
        throw GridMismatch("sup_distance: trajectories of different length");
    }
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, product_norm(a[k] - b[k], p));
    return m;
}

Waveform Waveform::constant(double value) { return Waveform(1.0, value, {}, {}); }

Waveform::Waveform(double period, double a0, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs)
    : period_(period), a0_(a0), cos_(std::move(cos_coeffs)), sin_(std::move(sin_coeffs)) {
    if (!(period > 0.0)) {
        throw InvalidArgument("Waveform: period must be positive");
    }
}

double Waveform::operator()(double t) const {
    // phase reduction makes w(t + T) == w(t) bitwise
    const double phase = 2.0 * std::numbers::pi * (t / period_ - std::floor(t / period_));
    double v = a0_;
    for (std::size_t k = 0; k < cos_.size(); ++k) v += cos_[k] * std::cos((k + 1.0) * phase);
    for (std::size_t k = 0; k < sin_.size(); ++k) v += sin_[k] * std::sin((k + 1.0) * phase);
    return v;
}

double Waveform::bound() const {
    double b = std::abs(a0_);
    for (double c : cos_) b += std::abs(c);
    for (double s : sin_) b += std::abs(s);
    return b;
}

double ModulatedField::sup_norm(double p) const {
    constexpr int samples = 256;
    double w = 0.0;
    for (int k = 0; k < samples; ++k) w = std::max(w, std::abs(wave(wave.period() * k / samples)));
    return w * lp_norm(profile, p);
}

ForcingSpec ForcingSpec::zeros(const GridPtr& grid, double period) {
    const Waveform w(period, 0.0, {}, {});
    const auto z = RadialField::zeros(grid);
    return ForcingSpec{{z, w}, {z, w}, {z, w}, period};
}

bool ForcingSpec::is_periodic_with(double T) const {
    auto divides = [T](const Waveform& w) {
        if (w.is_constant()) return true;
        const double ratio = T / w.period();
        return std::abs(ratio - std::round(ratio)) < 1e-12 && std::round(ratio) >= 1;
    };
    return divides(F.wave) && divides(f.wave) && divides(h.wave);
}

double ForcingSpec::pair_norm(double q) const { return std::max(F.sup_norm(q), f.sup_norm(q)); }

}  // namespace hypmild
